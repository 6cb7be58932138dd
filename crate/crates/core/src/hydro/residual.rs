use serde::Serialize;

use super::chart::{dphi, extract_hydro, extract_hydro_after, HydroState};
use super::observables::{chart_gradient, check_dims, observables};
use crate::error::{Error, Result};
use crate::kdv::Trajectory;
use crate::micro::MicroTrajectory;
use crate::models::{GeometryData, MicroModelSpec};
use crate::spectral::{RealField, Spectral};

/// Chart coordinates of every snapshot, with the phase kept continuous in time.
pub fn extract_trajectory(spec: &MicroModelSpec, tr: &MicroTrajectory) -> Result<Vec<HydroState>> {
    let mut out: Vec<HydroState> = Vec::with_capacity(tr.states.len());
    for s in &tr.states {
        let h = match out.last() {
            None => extract_hydro(spec, s)?,
            Some(prev) => extract_hydro_after(spec, s, prev)?,
        };
        out.push(h);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResidualOptions {
    /// Drop every `1/eps^2` term from both lines (wiring check).
    pub ablate_singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HydroResidual {
    /// Snapshot indices at which the residual was evaluated.
    pub indices: Vec<usize>,
    /// L2 norm of the phase line.
    pub r1: Vec<f64>,
    /// L2 norm of the normal line.
    pub r2: Vec<f64>,
    /// `sqrt(r1^2 + r2^2)`.
    pub total: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    /// Number of points of the centered time stencil.
    pub stencil: usize,
}

fn stencil_weights(len: usize) -> Result<(usize, &'static [f64], f64)> {
    const FIVE: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    const THREE: [f64; 3] = [-1.0, 0.0, 1.0];
    match len {
        0..=2 => Err(Error::param("trajectory", "at least three snapshots are needed")),
        3 | 4 => Ok((1, &THREE, 2.0)),
        _ => Ok((2, &FIVE, 12.0)),
    }
}

/// Both lines of the hydrodynamic system evaluated on extracted chart
/// coordinates, with time derivatives from centered differencing of the
/// snapshots (spacing `dt`):
///
/// `r1 = S0 DPhi phi_t - i0 b / eps^2`,
/// `b = -2 lambda n + i0^{-1}(c + i0B0) S0 X + eps^2 (II(S0 X, X)/2 + n_xx/2 - F1(n, n))`,
/// `r2 = n_t + i0^{-1} t / eps^2`,
/// `t = (S0 X)_x/2 - (c - i0B0) i0 n_x + eps^2 II^T(X, n_x)/2`,
///
/// with `X = DPhi phi_x` and `S0 Y = Y + eps^2 II^T(Y, n)`.
pub fn hydro_residual(g: &GeometryData, hs: &[HydroState], dt: f64, opts: ResidualOptions) -> Result<HydroResidual> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    let (half, w, denom) = stencil_weights(hs.len())?;
    for h in hs {
        check_dims(g, h)?;
        h.require_valid()?;
        if h.grid() != hs[0].grid() || h.eps != hs[0].eps {
            return Err(Error::GridMismatch);
        }
    }
    let eps = hs[0].eps;
    let e2 = eps * eps;
    let sing = if opts.ablate_singular { 0.0 } else { 1.0 / e2 };
    let grid = *hs[0].grid();
    let sp = Spectral::new(grid);
    let d = g.dim();

    let mut out = HydroResidual {
        indices: Vec::new(),
        r1: Vec::new(),
        r2: Vec::new(),
        total: Vec::new(),
        max: 0.0,
        mean: 0.0,
        stencil: w.len(),
    };
    for m in half..hs.len() - half {
        let h = &hs[m];
        let diff = |f: &dyn Fn(&HydroState) -> &RealField| {
            let mut acc = RealField::zeros(grid, d);
            for (i, wi) in w.iter().enumerate() {
                if *wi != 0.0 {
                    acc.axpy(wi / (denom * dt), f(&hs[m + i - half]));
                }
            }
            acc
        };
        let phi_t = diff(&|s| &s.phi);
        let n_t = diff(&|s| &s.n);
        let x = chart_gradient(h);
        let nx = sp.derivative(&h.n, 1);
        let nxx = sp.derivative(&h.n, 2);

        let mut s0x = RealField::zeros(grid, d);
        for j in 0..grid.n_points() {
            let xv = x.vector_at(j);
            let top = g.ii_top(&xv, &h.n.vector_at(j));
            for c in 0..d {
                s0x.component_mut(c)[j] = xv[c] + e2 * top[c];
            }
        }
        let s0x_x = sp.derivative(&s0x, 1);

        let mut r1 = vec![0.0; grid.n_points()];
        let mut r2 = vec![0.0; grid.n_points()];
        for j in 0..grid.n_points() {
            let n = h.n.vector_at(j);
            let xv = x.vector_at(j);
            let sx = s0x.vector_at(j);
            let p = [eps * h.phi.at(0, j), if d > 1 { eps * h.phi.at(1, j) } else { 0.0 }];
            let yt = dphi(&h.spec, &p[..d.min(2)], &phi_t.vector_at(j));
            let top_t = g.ii_top(&yt, &n);
            let lhs1: Vec<f64> = (0..d).map(|c| yt[c] + e2 * top_t[c]).collect();

            let lin = g.i0_inv(&g.c_plus_b(1.0, &sx));
            let iis = g.ii_normal(&sx, &xv);
            let f = g.f1_normal(&n, &n);
            let nxxv = nxx.vector_at(j);
            let b_sing: Vec<f64> = (0..d).map(|c| -2.0 * g.lambda() * n[c] + lin[c]).collect();
            let b_reg: Vec<f64> = (0..d).map(|c| 0.5 * iis[c] + 0.5 * nxxv[c] - f[c]).collect();
            let jb_sing = g.i0_normal(&b_sing);
            let jb_reg = g.i0_normal(&b_reg);

            let nxv = nx.vector_at(j);
            let jnx = g.i0_normal(&nxv);
            let cj = g.c_plus_b(-1.0, &jnx);
            let sxx = s0x_x.vector_at(j);
            let t_sing: Vec<f64> = (0..d).map(|c| 0.5 * sxx[c] - cj[c]).collect();
            let t_reg = g.ii_top(&xv, &nxv);
            let it_sing = g.i0_inv(&t_sing);
            let it_reg = g.i0_inv(&t_reg);
            let ntv = n_t.vector_at(j);

            let mut a1 = 0.0;
            let mut a2 = 0.0;
            for c in 0..d {
                let v1 = lhs1[c] - sing * jb_sing[c] - jb_reg[c];
                let v2 = ntv[c] + sing * it_sing[c] + 0.5 * it_reg[c];
                a1 += v1 * v1;
                a2 += v2 * v2;
            }
            r1[j] = a1;
            r2[j] = a2;
        }
        let n1 = grid.integrate(&r1).sqrt();
        let n2 = grid.integrate(&r2).sqrt();
        out.indices.push(m);
        out.r1.push(n1);
        out.r2.push(n2);
        out.total.push(n1.hypot(n2));
    }
    out.max = out.total.iter().cloned().fold(0.0, f64::max);
    out.mean = out.total.iter().sum::<f64>() / out.total.len() as f64;
    Ok(out)
}

/// Distance between the micro observables and the KdV solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitError {
    pub times: Vec<f64>,
    /// `|2 i lambda n - A|_{L2}`.
    pub err_a: Vec<f64>,
    /// `|(c + i0B0) DPhi phi_x - A|_{L2}`.
    pub err_phase: Vec<f64>,
    pub eps_phi_linf: Vec<f64>,
    pub w_l2: Vec<f64>,
    pub sup_err_a: f64,
    pub sup_err_phase: f64,
    pub sup_w: f64,
    pub max_eps_phi: f64,
    pub chart_radius: f64,
    /// All snapshots inside the chart with `eps |phi|_inf` below the radius.
    pub chart_valid: bool,
}

/// Snapshot times must agree to `1e-9` relative.
pub fn check_time_grids(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::TimeGridMismatch(format!("{} micro vs {} limit snapshots", a.len(), b.len())));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if (x - y).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(Error::TimeGridMismatch(format!("snapshot {i}: t = {x} vs {y}")));
        }
    }
    Ok(())
}

pub fn limit_error(
    g: &GeometryData,
    spec: &MicroModelSpec,
    micro: &MicroTrajectory,
    kdv: &Trajectory,
) -> Result<LimitError> {
    check_time_grids(&micro.times, &kdv.times)?;
    let hs = extract_trajectory(spec, micro)?;
    let mut out = LimitError {
        times: micro.times.clone(),
        err_a: Vec::new(),
        err_phase: Vec::new(),
        eps_phi_linf: Vec::new(),
        w_l2: Vec::new(),
        sup_err_a: 0.0,
        sup_err_phase: 0.0,
        sup_w: 0.0,
        max_eps_phi: 0.0,
        chart_radius: spec.chart_radius(),
        chart_valid: true,
    };
    for (h, a) in hs.iter().zip(&kdv.snapshots) {
        if a.grid() != h.grid() || a.dim() != h.dim() {
            return Err(Error::GridMismatch);
        }
        let ep = h.eps_phi_linf();
        out.eps_phi_linf.push(ep);
        out.max_eps_phi = out.max_eps_phi.max(ep);
        if !h.valid {
            out.chart_valid = false;
            break;
        }
        let o = observables(g, h)?;
        let cx = o.w.add(&o.a);
        out.err_a.push(o.a.sub(a).l2_norm());
        out.err_phase.push(cx.sub(a).l2_norm());
        out.w_l2.push(o.w.l2_norm());
    }
    let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    out.sup_err_a = sup(&out.err_a);
    out.sup_err_phase = sup(&out.err_phase);
    out.sup_w = sup(&out.w_l2);
    Ok(out)
}
