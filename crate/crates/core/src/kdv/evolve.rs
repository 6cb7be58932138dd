use serde::Serialize;

use super::model::{KdvOperator, LimitModel};
use crate::error::{Error, Result};
use crate::spectral::{hs_seminorms, IfRk4, Padding, RealField, Spectral};

/// Default growth factor of `max|u_x|` that counts as breakdown.
pub const DEFAULT_BLOWUP_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breakdown {
    pub t: f64,
    pub reason: String,
}

/// Snapshots of one run plus the per-step gradient history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RealField>,
    /// Step times at which `max_gradient` was sampled (every step).
    pub step_times: Vec<f64>,
    pub max_gradient: Vec<f64>,
    pub breakdown: Option<Breakdown>,
    pub steps: usize,
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &RealField {
        self.snapshots.last().expect("trajectory has the initial snapshot")
    }

    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KdvRunOptions {
    /// Signed final time; must have the sign of `dt`.
    pub t_final: f64,
    pub dt: f64,
    /// Store a snapshot every this many steps (the final state is always kept).
    pub snapshot_every: usize,
    /// `None` disables the breakdown monitor (NaN still stops the run).
    pub blowup_factor: Option<f64>,
}

impl KdvRunOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            snapshot_every: usize::MAX,
            blowup_factor: Some(DEFAULT_BLOWUP_FACTOR),
        }
    }

    pub fn snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every.max(1);
        self
    }

    pub fn blowup(mut self, factor: Option<f64>) -> Self {
        self.blowup_factor = factor;
        self
    }
}

/// Number of steps and the adjusted step so that `steps * dt == t_final`.
pub fn step_plan(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::param("dt", format!("must be finite and nonzero, got {dt}")));
    }
    if !t_final.is_finite() || (t_final != 0.0 && t_final.signum() != dt.signum()) {
        return Err(Error::param("t_final", "must be finite with the sign of dt"));
    }
    let n = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    if n == 0 {
        return Ok((0, dt));
    }
    Ok((n, t_final / n as f64))
}

fn max_gradient(sp: &Spectral, u: &RealField) -> f64 {
    let d = sp.derivative(u, 1);
    if !d.is_finite() {
        return f64::NAN;
    }
    d.linf_norm()
}

/// Integrates the model with integrating-factor RK4: dispersion and advection
/// exactly in Fourier space, the quadratic term by RK4.
pub fn evolve_kdv_with(model: &LimitModel, u0: &RealField, opts: &KdvRunOptions) -> Result<Trajectory> {
    if u0.dim() != model.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            got: u0.dim(),
        });
    }
    u0.check_finite("evolve_kdv initial data")?;
    let (steps, dt) = step_plan(opts.t_final, opts.dt)?;
    let sp = Spectral::new(*u0.grid());
    let op = KdvOperator::new(model.clone(), sp.clone());
    let symbol = |k: f64| model.linear_symbol(k);
    let stepper = IfRk4::new(sp.clone(), &symbol, if steps == 0 { opts.dt } else { dt })?;
    let nonlinear = |u: &RealField| op.nonlinear(u);

    let g0 = max_gradient(&sp, u0);
    let mut traj = Trajectory {
        times: vec![0.0],
        snapshots: vec![u0.clone()],
        step_times: vec![0.0],
        max_gradient: vec![g0],
        breakdown: None,
        steps: 0,
        dt,
    };
    let mut u = u0.clone();
    for n in 1..=steps {
        let t_prev = (n - 1) as f64 * dt;
        let t = n as f64 * dt;
        match stepper.step(&u, &nonlinear, t_prev) {
            Ok(next) => u = next,
            Err(Error::StepRejected { reason, .. }) => {
                traj.breakdown = Some(Breakdown { t, reason });
                break;
            }
            Err(e) => return Err(e),
        }
        traj.steps = n;
        let g = max_gradient(&sp, &u);
        traj.step_times.push(t);
        traj.max_gradient.push(g);
        if let Some(reason) = breakdown_reason(g0, g, opts.blowup_factor) {
            traj.breakdown = Some(Breakdown { t, reason });
            traj.times.push(t);
            traj.snapshots.push(u.clone());
            break;
        }
        if n % opts.snapshot_every == 0 || n == steps {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
        }
    }
    Ok(traj)
}

/// [`evolve_kdv_with`] storing only the initial and final states.
pub fn evolve_kdv(model: &LimitModel, u0: &RealField, t_final: f64, dt: f64) -> Result<Trajectory> {
    evolve_kdv_with(model, u0, &KdvRunOptions::new(t_final, dt))
}

fn breakdown_reason(g0: f64, g: f64, factor: Option<f64>) -> Option<String> {
    if !g.is_finite() {
        return Some("non-finite gradient".into());
    }
    let f = factor?;
    (g > f * g0 && g > 1e-12).then(|| format!("max|u_x| = {g:.3e} exceeds {f} x initial {g0:.3e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub detected: bool,
    pub time: Option<f64>,
    pub initial_gradient: f64,
    pub peak_gradient: f64,
    pub factor: f64,
}

/// Scans the per-step gradient history for breakdown.
pub fn blowup_monitor(traj: &Trajectory, factor: f64) -> BlowupReport {
    let g0 = traj.max_gradient.first().copied().unwrap_or(0.0);
    let mut peak: f64 = g0;
    let mut time = None;
    for (&t, &g) in traj.step_times.iter().zip(&traj.max_gradient) {
        if g.is_finite() {
            peak = peak.max(g);
        }
        if breakdown_reason(g0, g, Some(factor)).is_some() {
            time = Some(t);
            break;
        }
    }
    if time.is_none() {
        if let Some(b) = &traj.breakdown {
            if b.reason.contains("non-finite") {
                time = Some(b.t);
            }
        }
    }
    BlowupReport {
        detected: time.is_some(),
        time,
        initial_gradient: g0,
        peak_gradient: peak,
        factor,
    }
}

/// Hamiltonian, mass and momentum of a canonical-form state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conserved {
    pub h: f64,
    pub m: f64,
    pub p: Vec<f64>,
}

/// `H = int 1/2 |u_x|^2 + 1/3 Q(u,u).u`, `M = int |u|^2`, `P = int u`.
/// The cubic term is integrated on the 2N grid, which is exact for
/// band-limited data.
pub fn conserved_quantities(model: &LimitModel, u: &RealField) -> Result<Conserved> {
    let q = model.require_canonical()?;
    if u.dim() != q.dim() {
        return Err(Error::DimMismatch {
            expected: q.dim(),
            got: u.dim(),
        });
    }
    u.check_finite("conserved_quantities input")?;
    let norms = hs_seminorms(u, 1)?;
    let m = norms[0] * norms[0];
    let grad2 = norms[1] * norms[1];
    let cubic = if q.is_zero() {
        0.0
    } else {
        let sp = Spectral::new(*u.grid());
        let pad = Padding::Cubic;
        let padded: Vec<Vec<f64>> = u
            .components()
            .iter()
            .map(|c| sp.pad_real(&sp.to_spectrum(c), pad))
            .collect();
        let mlen = padded[0].len();
        let d = u.dim();
        let mut x = vec![0.0; d];
        let mut sum = 0.0;
        for p in 0..mlen {
            for i in 0..d {
                x[i] = padded[i][p];
            }
            sum += q.form(&x, &x, &x);
        }
        sum * u.grid().length() / mlen as f64
    };
    Ok(Conserved {
        h: 0.5 * grad2 + cubic / 3.0,
        m,
        p: u.integral(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdv::QTensor;
    use crate::spectral::{advance_linear, Grid};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let m = LimitModel::canonical(QTensor::scalar(1.0), 1.0).unwrap();
        let u0 = RealField::zeros(grid(32), 1);
        let tr = evolve_kdv(&m, &u0, 0.1, 1e-3).unwrap();
        assert!(tr.last().linf_norm() == 0.0);
        assert!(tr.completed());
    }

    #[test]
    fn linear_run_matches_propagator() {
        let m = LimitModel::canonical(QTensor::zero(1), 1.0).unwrap();
        let u0 = RealField::from_fn(grid(32), 1, |_, x| (3.0 * x).sin());
        let tr = evolve_kdv(&m, &u0, 0.7, 0.013).unwrap();
        let want = advance_linear(&u0, |k| m.linear_symbol(k), 0.7).unwrap();
        assert!(tr.last().max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn step_plan_adjusts_dt() {
        let (n, dt) = step_plan(1.0, 0.3).unwrap();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(step_plan(1.0, 1e-3).unwrap().0, 1000);
        assert!(step_plan(1.0, -1e-3).is_err());
        assert_eq!(step_plan(-1.0, -0.5).unwrap().0, 2);
    }

    #[test]
    fn conserved_quantities_of_sine() {
        let g = grid(64);
        let u = RealField::from_fn(g, 1, |_, x| x.sin());
        let lin = LimitModel::canonical(QTensor::zero(1), 1.0).unwrap();
        let c = conserved_quantities(&lin, &u).unwrap();
        assert!((c.h - PI / 2.0).abs() < 1e-12);
        assert!((c.m - PI).abs() < 1e-12);
        assert!(c.p[0].abs() < 1e-12);
        let burgers = LimitModel::canonical(QTensor::scalar(1.0), 1.0).unwrap();
        let c = conserved_quantities(&burgers, &u).unwrap();
        assert!((c.h - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_term_matches_quadrature_oracle() {
        // int (1 + cos x)^3 over [0, 2pi) = 5 pi.
        let g = grid(16);
        let u = RealField::from_fn(g, 1, |_, x| 1.0 + x.cos());
        let m = LimitModel::canonical(QTensor::scalar(1.0), 1.0).unwrap();
        let c = conserved_quantities(&m, &u).unwrap();
        assert!((c.h - (0.5 * PI + 5.0 * PI / 3.0)).abs() < 1e-12);
    }
}
