use super::state::{check_eps, MicroState};
use crate::error::{Error, Result};
use crate::hydro::{dphi_inverse, reconstruct_micro, HydroState};
use crate::models::{GeometryData, MicroModelSpec};
use crate::spectral::{RealField, Spectral};

const AF_ITERATIONS: usize = 100;
const AF_TOL: f64 = 1e-14;

/// Micro state whose chart coordinates satisfy `(c + i0B0) DPhi phi_x = A0`
/// and `2 i lambda n = A0` on the grid.
///
/// `A0` must have zero mean in every component so that `phi` is periodic.
/// For the AF chain `DPhi` depends on `phi`, and `phi` is found by fixed
/// point iteration; the mean of `DPhi^{-1} X` is then projected out.
pub fn well_prepared_init(spec: &MicroModelSpec, g: &GeometryData, a0: &RealField, eps: f64) -> Result<MicroState> {
    check_eps(eps)?;
    a0.check_finite("A0")?;
    if a0.dim() != g.dim() {
        return Err(Error::DimMismatch { expected: g.dim(), got: a0.dim() });
    }
    let scale = a0.linf_norm().max(1.0);
    for (c, m) in a0.mean().into_iter().enumerate() {
        if m.abs() > 1e-10 * scale {
            return Err(Error::param("A0", format!("component {c} has mean {m:e}; no periodic phase exists")));
        }
    }
    let grid = *a0.grid();
    let d = g.dim();
    let lam = g.lambda();
    let mut x = RealField::zeros(grid, d);
    let mut n = RealField::zeros(grid, d);
    for j in 0..grid.n_points() {
        let a = a0.vector_at(j);
        let xv = g.c_plus_b(-1.0, &a);
        let nv = g.i0_inv(&a);
        for c in 0..d {
            x.component_mut(c)[j] = xv[c] / lam;
            n.component_mut(c)[j] = nv[c] / (2.0 * lam);
        }
    }
    let sp = Spectral::new(grid);
    let integrate = |y: &RealField| -> RealField {
        let comps = y.components().iter().map(|v| sp.antiderivative(v)).collect();
        RealField::new(grid, comps).expect("same grid")
    };
    let mut phi = integrate(&x);
    if matches!(spec, MicroModelSpec::AfChain) {
        for _ in 0..AF_ITERATIONS {
            let mut y = x.clone();
            for j in 0..grid.n_points() {
                let p: Vec<f64> = (0..d).map(|c| eps * phi.at(c, j)).collect();
                let v = dphi_inverse(spec, &p, &x.vector_at(j));
                for c in 0..d {
                    y.component_mut(c)[j] = v[c];
                }
            }
            let next = integrate(&y);
            let change = next.max_abs_diff(&phi);
            phi = next;
            if change <= AF_TOL * phi.linf_norm().max(1.0) {
                break;
            }
        }
    }
    reconstruct_micro(&HydroState {
        spec: spec.clone(),
        eps,
        phi,
        n,
        valid: true,
        issue: None,
    })
}
