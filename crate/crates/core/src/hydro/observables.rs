use serde::Serialize;

use super::chart::{dphi_field, HydroState};
use crate::error::{Error, Result};
use crate::models::GeometryData;
use crate::spectral::{hs_seminorms, RealField, Spectral};

/// Limit observables in tangent coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    /// `(c + i0 B0) DPhi phi_x - 2 i lambda n`.
    pub w: RealField,
    /// `(c - i0 B0) DPhi phi_x + A`.
    pub u: RealField,
    /// `2 i lambda n`.
    pub a: RealField,
    /// `DPhi phi_x`.
    pub dphi_x: RealField,
}

impl Observables {
    /// `DPhi phi_x` recovered as `(U + W) / (2c)`.
    pub fn dphi_x_from_uw(&self, g: &GeometryData) -> RealField {
        self.u.add(&self.w).scaled(0.5 / g.c())
    }

    /// `A` recovered as `((c + iB) U - (c - iB) W) / (2c)`.
    pub fn a_from_uw(&self, g: &GeometryData) -> RealField {
        pointwise(&self.u, |j, _| {
            let cu = g.c_plus_b(1.0, &self.u.vector_at(j));
            let cw = g.c_plus_b(-1.0, &self.w.vector_at(j));
            cu.iter().zip(cw).map(|(a, b)| (a - b) / (2.0 * g.c())).collect()
        })
    }
}

pub(crate) fn pointwise(like: &RealField, f: impl Fn(usize, &RealField) -> Vec<f64>) -> RealField {
    let mut out = RealField::zeros(*like.grid(), like.dim());
    for j in 0..like.len() {
        let v = f(j, like);
        for (c, x) in v.into_iter().enumerate() {
            out.component_mut(c)[j] = x;
        }
    }
    out
}

pub(crate) fn check_dims(g: &GeometryData, h: &HydroState) -> Result<()> {
    if h.dim() != g.dim() {
        return Err(Error::DimMismatch { expected: g.dim(), got: h.dim() });
    }
    Ok(())
}

/// `DPhi phi_x` with a spectral derivative.
pub(crate) fn chart_gradient(h: &HydroState) -> RealField {
    let sp = Spectral::new(*h.grid());
    dphi_field(h, &sp.derivative(&h.phi, 1))
}

pub fn observables(g: &GeometryData, h: &HydroState) -> Result<Observables> {
    check_dims(g, h)?;
    h.require_valid()?;
    let x = chart_gradient(h);
    let two_l = 2.0 * g.lambda();
    let a = pointwise(&h.n, |j, n| g.i0_normal(&n.vector_at(j)).into_iter().map(|v| two_l * v).collect());
    let w = pointwise(&x, |j, x| {
        let cx = g.c_plus_b(1.0, &x.vector_at(j));
        cx.iter().zip(a.vector_at(j)).map(|(p, q)| p - q).collect()
    });
    let u = pointwise(&x, |j, x| {
        let cx = g.c_plus_b(-1.0, &x.vector_at(j));
        cx.iter().zip(a.vector_at(j)).map(|(p, q)| p + q).collect()
    });
    Ok(Observables { w, u, a, dphi_x: x })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianValue {
    pub h: f64,
    /// `|W|^2_{L2} / (4 lambda)`, the leading-order value of `h`.
    pub w_identity: f64,
}

/// `H = int lambda|n|^2 + 1/4 eps^4 |n_x|^2 + 1/3 eps^2 F1(n,n).n + 1/4 |S0 X|^2
///     - (c + i0B0)(X + 1/2 eps^2 II^T(X, n)) . i0 n` with `X = DPhi phi_x`.
pub fn almost_hamiltonian(g: &GeometryData, h: &HydroState) -> Result<HamiltonianValue> {
    let obs = observables(g, h)?;
    let sp = Spectral::new(*h.grid());
    let nx = sp.derivative(&h.n, 1);
    let e2 = h.eps * h.eps;
    let lam = g.lambda();
    let mut dens = vec![0.0; h.n.len()];
    for (j, dj) in dens.iter_mut().enumerate() {
        let n = h.n.vector_at(j);
        let x = obs.dphi_x.vector_at(j);
        let ntop = g.ii_top(&x, &n);
        let s0x: Vec<f64> = x.iter().zip(&ntop).map(|(a, b)| a + e2 * b).collect();
        let half: Vec<f64> = x.iter().zip(&ntop).map(|(a, b)| a + 0.5 * e2 * b).collect();
        let f = g.f1_normal(&n, &n);
        let jn = g.i0_normal(&n);
        *dj = lam * dot(&n, &n)
            + 0.25 * e2 * e2 * dot(&nx.vector_at(j), &nx.vector_at(j))
            + e2 / 3.0 * dot(&f, &n)
            + 0.25 * dot(&s0x, &s0x)
            - dot(&g.c_plus_b(1.0, &half), &jn);
    }
    let grid = h.grid();
    let w2 = obs.w.l2_norm().powi(2);
    Ok(HamiltonianValue {
        h: grid.integrate(&dens),
        w_identity: w2 / (4.0 * lam),
    })
}

/// `|phi_x|_{H^2} + |n|_{H^2}`, a spatial stand-in for the uniform energies.
pub fn energy_proxy(h: &HydroState) -> Result<f64> {
    let sp = Spectral::new(*h.grid());
    let h2 = |f: &RealField| -> Result<f64> { Ok(hs_seminorms(f, 2)?.iter().map(|s| s * s).sum::<f64>().sqrt()) };
    Ok(h2(&sp.derivative(&h.phi, 1))? + h2(&h.n)?)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
