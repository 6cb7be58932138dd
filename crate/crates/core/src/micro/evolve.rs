use serde::{Deserialize, Serialize};

use super::rhs::MicroSystem;
use super::state::{renormalize, unit_defect, MicroField, MicroState, UNIT_TOL};
use crate::error::{Error, Result};
use crate::kdv::{step_plan, Breakdown};
use crate::models::MicroModelSpec;
use crate::spectral::{ComplexField, IfRk4, LinearPropagator, RealField};

/// Time integrator for the GP models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpScheme {
    /// Half phase rotation, exact linear step, half phase rotation.
    Strang,
    /// Triple-jump composition of Strang steps (fourth order).
    #[default]
    Yoshida4,
    /// Integrating-factor RK4 with the potential term in the RK stages.
    IfRk4,
}

/// Default step `min(eps^2/10, 0.2 eps dx^2, eps^3 / (2 s))` with `s` the
/// potential stiffness (at least 1).
///
/// The dispersive term turns a mode by `k^2 dt / (2 eps)` per step and the
/// potential couples at rate `2 s / eps^3`. Both are handled explicitly or by
/// splitting, so once either angle is of order one near the grid cutoff the
/// step resonates with a Bogoliubov pair `(k, -k)` and the run blows up.
pub fn default_micro_dt(spec: &MicroModelSpec, eps: f64, dx: f64) -> f64 {
    let s = spec.stiffness().max(1.0);
    (eps * eps / 10.0).min(0.2 * eps * dx * dx).min(eps.powi(3) / (2.0 * s))
}

#[derive(Debug, Clone, Copy)]
pub struct MicroRunOptions {
    pub t_final: f64,
    /// `None` selects [`default_micro_dt`].
    pub dt: Option<f64>,
    pub snapshot_every: usize,
    pub gp_scheme: GpScheme,
}

impl MicroRunOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            dt: None,
            snapshot_every: usize::MAX,
            gp_scheme: GpScheme::Yoshida4,
        }
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every.max(1);
        self
    }

    pub fn scheme(mut self, s: GpScheme) -> Self {
        self.gp_scheme = s;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MicroTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<MicroState>,
    pub steps: usize,
    pub dt: f64,
    pub breakdown: Option<Breakdown>,
    /// Largest `| |G| - 1 |` seen after renormalization (spin models).
    pub max_unit_defect: f64,
    /// Largest relative change of `int |u|^2` (GP models).
    pub max_mass_drift: f64,
}

impl MicroTrajectory {
    pub fn last(&self) -> &MicroState {
        self.states.last().expect("trajectory has the initial state")
    }

    pub fn completed(&self) -> bool {
        self.breakdown.is_none()
    }
}

fn gp_mass(u: &ComplexField) -> f64 {
    let l2 = u.l2_norm();
    l2 * l2
}

enum Stepper {
    Split(Vec<(f64, LinearPropagator)>),
    If(IfRk4),
}

const YOSHIDA_W1: f64 = 1.351_207_191_959_657_8;
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_3;

/// Integrates a microscopic model in the rescaled frame.
pub fn evolve_micro(spec: &MicroModelSpec, s0: &MicroState, opts: &MicroRunOptions) -> Result<MicroTrajectory> {
    let sys = MicroSystem::new(spec, *s0.grid(), s0.eps())?;
    let s0 = MicroState::new(spec, s0.eps(), s0.field().clone())?;
    let dt_req = opts
        .dt
        .unwrap_or_else(|| default_micro_dt(spec, s0.eps(), s0.grid().spacing()));
    if !(dt_req > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt_req}")));
    }
    let (steps, dt) = step_plan(opts.t_final, dt_req)?;
    let sp = sys.spectral().clone();
    let eps = s0.eps();

    let mut traj = MicroTrajectory {
        times: vec![0.0],
        states: vec![s0.clone()],
        steps: 0,
        dt,
        breakdown: None,
        max_unit_defect: 0.0,
        max_mass_drift: 0.0,
    };
    if steps == 0 {
        return Ok(traj);
    }

    match s0.field() {
        MicroField::Gp(u0) => {
            let gp_sym = |k: f64| sys.gp_linear_symbol(k);
            let stepper = match opts.gp_scheme {
                GpScheme::Strang => Stepper::Split(vec![(1.0, LinearPropagator::new(&sp, &gp_sym, dt)?)]),
                GpScheme::Yoshida4 => Stepper::Split(vec![
                    (YOSHIDA_W1, LinearPropagator::new(&sp, &gp_sym, YOSHIDA_W1 * dt)?),
                    (YOSHIDA_W0, LinearPropagator::new(&sp, &gp_sym, YOSHIDA_W0 * dt)?),
                    (YOSHIDA_W1, LinearPropagator::new(&sp, &gp_sym, YOSHIDA_W1 * dt)?),
                ]),
                GpScheme::IfRk4 => Stepper::If(IfRk4::new(sp.clone(), &gp_sym, dt)?),
            };
            let nonlinear = |u: &ComplexField| Ok(sys.gp_potential_rhs(u));
            let m0 = gp_mass(u0);
            let mut u = u0.clone();
            for n in 1..=steps {
                let t = n as f64 * dt;
                match &stepper {
                    Stepper::Split(stages) => {
                        for (w, prop) in stages {
                            sys.gp_phase_step(&mut u, 0.5 * w * dt);
                            u = sp.apply_multiplier(&u, prop.multipliers());
                            sys.gp_phase_step(&mut u, 0.5 * w * dt);
                        }
                    }
                    Stepper::If(st) => match st.step(&u, &nonlinear, t - dt) {
                        Ok(next) => u = next,
                        Err(Error::StepRejected { reason, .. }) => {
                            traj.breakdown = Some(Breakdown { t, reason });
                            break;
                        }
                        Err(e) => return Err(e),
                    },
                }
                traj.steps = n;
                if !u.is_finite() {
                    traj.breakdown = Some(Breakdown {
                        t,
                        reason: "non-finite field".into(),
                    });
                    break;
                }
                traj.max_mass_drift = traj.max_mass_drift.max((gp_mass(&u) - m0).abs() / m0);
                if let Some(reason) = gp_window_violation(&u) {
                    traj.breakdown = Some(Breakdown { t, reason });
                    traj.times.push(t);
                    traj.states.push(MicroState::from_parts(eps, MicroField::Gp(u.clone())));
                    break;
                }
                if n % opts.snapshot_every == 0 || n == steps {
                    traj.times.push(t);
                    traj.states.push(MicroState::from_parts(eps, MicroField::Gp(u.clone())));
                }
            }
        }
        MicroField::Spins(f0) => {
            let tr = |k: f64| sys.transport_symbol(k);
            let stepper = IfRk4::new(sp.clone(), &tr, dt)?;
            let nonlinear = |f: &RealField| Ok(sys.spin_nonlinear(f));
            let mut f = f0.clone();
            for n in 1..=steps {
                let t = n as f64 * dt;
                match stepper.step(&f, &nonlinear, t - dt) {
                    Ok(next) => f = next,
                    Err(Error::StepRejected { reason, .. }) => {
                        traj.breakdown = Some(Breakdown { t, reason });
                        break;
                    }
                    Err(e) => return Err(e),
                }
                renormalize(&mut f);
                traj.steps = n;
                let d = unit_defect(&f);
                traj.max_unit_defect = traj.max_unit_defect.max(d);
                if !(d <= UNIT_TOL) {
                    traj.breakdown = Some(Breakdown {
                        t,
                        reason: format!("unit-norm defect {d:.3e}"),
                    });
                    break;
                }
                if n % opts.snapshot_every == 0 || n == steps {
                    traj.times.push(t);
                    traj.states.push(MicroState::from_parts(eps, MicroField::Spins(f.clone())));
                }
            }
        }
    }
    Ok(traj)
}

fn gp_window_violation(u: &ComplexField) -> Option<String> {
    let (lo, hi) = super::rhs::GP_AMPLITUDE_WINDOW;
    for k in 0..u.dim() {
        for z in u.component(k) {
            let a = z.norm();
            if !(lo..=hi).contains(&a) {
                return Some(format!("chart breakdown: |u_{k}| = {a:.4} left [{lo}, {hi}]"));
            }
        }
    }
    None
}
