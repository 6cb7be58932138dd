use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kdv::{flux_jacobian, genuine_nonlinearity, QTensor};

/// Residual below which a Newton iterate is accepted as a root.
pub const ROOT_TOL: f64 = 1e-12;
/// Roots closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-8;
const RANDOM_SEEDS: usize = 32;
const MAX_NEWTON: usize = 100;

/// Nonzero solutions of `Q(z, z) = z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoints {
    pub roots: Vec<Vec<f64>>,
    /// `|Q(z, z) - z|` for each root.
    pub residuals: Vec<f64>,
    pub seeds_tried: usize,
}

fn residual(q: &QTensor, z: &[f64]) -> Vec<f64> {
    q.eval(z, z).iter().zip(z).map(|(a, b)| a - b).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iteration with backtracking on `|Q(z,z) - z|`. Returns `None` when
/// it stalls or lands on `z = 0`.
pub fn newton_fixed_point(q: &QTensor, seed: &[f64]) -> Option<Vec<f64>> {
    let d = q.dim();
    let mut z = seed.to_vec();
    let mut f = residual(q, &z);
    let mut fn_ = norm(&f);
    for _ in 0..MAX_NEWTON {
        if fn_ <= 0.1 * ROOT_TOL {
            break;
        }
        let jac = flux_jacobian(q, &z) - DMatrix::identity(d, d);
        let step = jac.lu().solve(&DVector::from_iterator(d, f.iter().map(|v| -v)))?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-10 {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let ft = residual(q, &trial);
            let nt = norm(&ft);
            if nt.is_finite() && nt < (1.0 - 1e-4 * t) * fn_ {
                z = trial;
                f = ft;
                fn_ = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let scale = norm(&z).max(1.0);
    (fn_ <= ROOT_TOL * scale && norm(&z) > 1e-6).then_some(z)
}

/// Puts `v` on its ray's critical point `v / (Q(v,v).v)` of
/// `K(z) = Q(z,z).z/3 - |z|^2/2`, or `None` if the cubic form vanishes.
fn ray_scaled(q: &QTensor, v: &[f64]) -> Option<Vec<f64>> {
    let c = q.form(v, v, v);
    let n2: f64 = v.iter().map(|x| x * x).sum();
    (c.abs() > 1e-8 * n2.powf(1.5)).then(|| v.iter().map(|x| x * n2 / c).collect())
}

fn seeds(q: &QTensor, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = q.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut dirs = Vec::new();
    for _ in 0..RANDOM_SEEDS {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v).max(1e-12);
        v.iter_mut().for_each(|x| *x /= n);
        out.push(v.clone());
        dirs.push(v);
    }
    for e in 0..d {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        dirs.push(v);
    }
    for u in dirs.clone() {
        for r in genuine_nonlinearity(q, &u, 1e-9)? {
            dirs.push(r.vector);
        }
    }
    for v in &dirs {
        for s in [1.0, -1.0] {
            let sv: Vec<f64> = v.iter().map(|x| s * x).collect();
            if let Some(z) = ray_scaled(q, &sv) {
                out.push(z);
            }
        }
    }
    Ok(out)
}

/// All distinct nonzero roots of `Q(z,z) = z` reached by Newton from seeded
/// random directions, coordinate axes and flux-Jacobian eigenvectors (each
/// also moved to its ray's critical point). Roots are sorted by norm.
pub fn find_fixed_point(q: &QTensor, seed: u64) -> Result<FixedPoints> {
    if q.is_zero() {
        return Err(Error::param("Q", "the zero tensor has no nonzero fixed point"));
    }
    let starts = seeds(q, seed)?;
    let found: Vec<Option<Vec<f64>>> = starts.par_iter().map(|s| newton_fixed_point(q, s)).collect();
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for z in found.into_iter().flatten() {
        if roots.iter().all(|r| norm(&r.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>()) > DEDUP_TOL) {
            roots.push(z);
        }
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence(format!(
            "Newton found no nonzero root of Q(z,z) = z from {} seeds",
            starts.len()
        )));
    }
    roots.sort_by(|a, b| norm(a).total_cmp(&norm(b)).then_with(|| a.partial_cmp(b).unwrap()));
    let residuals = roots.iter().map(|z| norm(&residual(q, z))).collect();
    Ok(FixedPoints { roots, residuals, seeds_tried: starts.len() })
}
