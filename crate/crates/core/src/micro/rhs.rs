use num_complex::Complex64;

use super::state::{check_eps, cross, set_spin, spin, MicroField, MicroState};
use crate::error::{Error, Result};
use crate::kdv::Tensor3;
use crate::models::MicroModelSpec;
use crate::spectral::{ComplexField, Grid, RealField, Spectral};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Amplitude window of the GP chart.
pub const GP_AMPLITUDE_WINDOW: (f64, f64) = (0.5, 1.5);

/// A model on a fixed grid at fixed `eps`: everything the solvers need.
#[derive(Debug, Clone)]
pub struct MicroSystem {
    spec: MicroModelSpec,
    eps: f64,
    c: f64,
    lambda: f64,
    coupling: Option<Tensor3>,
    sp: Spectral,
}

impl MicroSystem {
    pub fn new(spec: &MicroModelSpec, grid: Grid, eps: f64) -> Result<Self> {
        spec.validate()?;
        check_eps(eps)?;
        let (lambda, c) = match *spec {
            MicroModelSpec::GpScalar => (1.0, 1.0),
            MicroModelSpec::GpCoupled { lambda, .. } => (lambda, lambda.sqrt()),
            MicroModelSpec::LlEasyPlane { k } => (k, k.sqrt()),
            MicroModelSpec::LlEasyCone { alpha, theta0, .. } => {
                let l = alpha * theta0.sin().powi(2);
                (l, l.sqrt())
            }
            MicroModelSpec::AfChain => (2.0, 1.0),
        };
        let coupling = spec.coupling().transpose()?.map(|f| f.symmetrized());
        Ok(Self {
            spec: spec.clone(),
            eps,
            c,
            lambda,
            coupling,
            sp: Spectral::new(grid),
        })
    }

    pub fn spec(&self) -> &MicroModelSpec {
        &self.spec
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Frame speed `c`.
    pub fn sound_speed(&self) -> f64 {
        self.c
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    /// Symbol of `(c/eps^2) d_x`.
    pub fn transport_symbol(&self, k: f64) -> Complex64 {
        I * (self.c * k / (self.eps * self.eps))
    }

    /// Symbol of `(c d_x + i eps/2 d_xx)/eps^2`.
    pub fn gp_linear_symbol(&self, k: f64) -> Complex64 {
        I * (self.c * k - 0.5 * self.eps * k * k) / (self.eps * self.eps)
    }

    /// `g_k / |u_k|` where `V'(u)_k = g_k u_k / |u_k|`.
    fn gp_radial_force(&self, amps: &[f64], out: &mut [f64]) {
        match &self.coupling {
            None => out[0] = -(1.0 - amps[0] * amps[0]),
            Some(f) => {
                let s: Vec<f64> = amps.iter().map(|a| a - 1.0).collect();
                let fss = f.apply(&s, &s);
                for k in 0..amps.len() {
                    out[k] = (2.0 * self.lambda * s[k] + fss[k]) / amps[k];
                }
            }
        }
    }

    /// `G(s)` of the coupled model or `(1 - |u|^2)^2 / 4` for the scalar one.
    pub(crate) fn gp_potential(&self, amps: &[f64]) -> f64 {
        match &self.coupling {
            None => 0.25 * (1.0 - amps[0] * amps[0]).powi(2),
            Some(f) => {
                let s: Vec<f64> = amps.iter().map(|a| a - 1.0).collect();
                let quad: f64 = s.iter().map(|v| v * v).sum();
                let cubic: f64 = f.apply(&s, &s).iter().zip(&s).map(|(a, b)| a * b).sum();
                self.lambda * quad + cubic / 3.0
            }
        }
    }

    fn check_gp_chart(&self, u: &ComplexField) -> Result<()> {
        let (lo, hi) = GP_AMPLITUDE_WINDOW;
        for k in 0..u.dim() {
            for (j, z) in u.component(k).iter().enumerate() {
                let a = z.norm();
                if !(lo..=hi).contains(&a) {
                    return Err(Error::ChartBreakdown {
                        index: j,
                        x: u.grid().x(j),
                        reason: format!("|u_{k}| = {a:.4} left [{lo}, {hi}]"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Exact flow of `eps^2 u_t = -(i/eps) V'(u)` over `dt`. Amplitudes are
    /// invariant, so the phase rotation is computed once.
    pub fn gp_phase_step(&self, u: &mut ComplexField, dt: f64) {
        let d = u.dim();
        let n = u.len();
        let scale = dt / self.eps.powi(3);
        let mut amps = vec![0.0; d];
        let mut g = vec![0.0; d];
        for j in 0..n {
            for k in 0..d {
                amps[k] = u.at(k, j).norm();
            }
            self.gp_radial_force(&amps, &mut g);
            for k in 0..d {
                let z = &mut u.component_mut(k)[j];
                *z *= Complex64::from_polar(1.0, -scale * g[k]);
            }
        }
    }

    /// `-(i/eps^3) V'(u)`.
    pub(crate) fn gp_potential_rhs(&self, u: &ComplexField) -> ComplexField {
        let d = u.dim();
        let mut out = ComplexField::zeros(*u.grid(), d);
        let scale = 1.0 / self.eps.powi(3);
        let mut amps = vec![0.0; d];
        let mut g = vec![0.0; d];
        for j in 0..u.len() {
            for k in 0..d {
                amps[k] = u.at(k, j).norm();
            }
            self.gp_radial_force(&amps, &mut g);
            for k in 0..d {
                out.component_mut(k)[j] = -I * scale * g[k] * u.at(k, j);
            }
        }
        out
    }

    fn gp_rhs(&self, u: &ComplexField) -> Result<ComplexField> {
        self.check_gp_chart(u)?;
        let mult = self.sp.multiplier(|k| self.gp_linear_symbol(k));
        let mut out = self.sp.apply_multiplier(u, &mult);
        out.axpy(1.0, &self.gp_potential_rhs(u));
        Ok(out)
    }

    /// Gradient of the LL anisotropy (along `e_3`).
    fn ll_potential_slope(&self, g3: f64) -> f64 {
        match self.spec {
            MicroModelSpec::LlEasyPlane { k } => 2.0 * k * g3,
            MicroModelSpec::LlEasyCone { alpha, beta, theta0 } => {
                let dl = g3 - theta0.cos();
                2.0 * alpha * dl - 3.0 * beta * dl * dl
            }
            _ => 0.0,
        }
    }

    /// LL anisotropy energy density.
    pub(crate) fn ll_potential(&self, g3: f64) -> f64 {
        match self.spec {
            MicroModelSpec::LlEasyPlane { k } => k * g3 * g3,
            MicroModelSpec::LlEasyCone { alpha, beta, theta0 } => {
                let dl = g3 - theta0.cos();
                alpha * dl * dl - beta * dl.powi(3)
            }
            _ => 0.0,
        }
    }

    /// Spin right-hand side without the `(c/eps^2) d_x` transport.
    pub fn spin_nonlinear(&self, f: &RealField) -> RealField {
        let fx = self.sp.derivative(f, 1);
        let fxx = self.sp.derivative(f, 2);
        let e = self.eps;
        let mut out = RealField::zeros(*f.grid(), f.dim());
        for j in 0..f.len() {
            match self.spec {
                MicroModelSpec::AfChain => {
                    let (u, v) = (spin(f, 0, j), spin(f, 1, j));
                    let (ux, vx) = (spin(&fx, 0, j), spin(&fx, 1, j));
                    let (uxx, vxx) = (spin(&fxx, 0, j), spin(&fxx, 1, j));
                    let mut du = [0.0; 3];
                    let mut dv = [0.0; 3];
                    let a = cross(u, uxx);
                    let b = cross(u, vx);
                    let c = cross(u, v);
                    let a2 = cross(v, vxx);
                    let b2 = cross(v, ux);
                    for m in 0..3 {
                        du[m] = (-0.5 * e * a[m] - b[m] + 2.0 / e * c[m]) / (e * e);
                        dv[m] = (-0.5 * e * a2[m] + b2[m] - 2.0 / e * c[m]) / (e * e);
                    }
                    set_spin(&mut out, 0, j, du);
                    set_spin(&mut out, 1, j, dv);
                }
                _ => {
                    let g = spin(f, 0, j);
                    let lap = cross(g, spin(&fxx, 0, j));
                    let pot = cross(g, [0.0, 0.0, self.ll_potential_slope(g[2])]);
                    let mut d = [0.0; 3];
                    for m in 0..3 {
                        d[m] = lap[m] / (2.0 * e) - pot[m] / e.powi(3);
                    }
                    set_spin(&mut out, 0, j, d);
                }
            }
        }
        out
    }

    fn spin_rhs(&self, f: &RealField) -> RealField {
        let mult = self.sp.multiplier(|k| self.transport_symbol(k));
        let mut out = self.sp.apply_multiplier(f, &mult);
        out.axpy(1.0, &self.spin_nonlinear(f));
        out
    }

    pub fn rhs(&self, field: &MicroField) -> Result<MicroField> {
        if field.grid() != self.sp.grid() {
            return Err(Error::GridMismatch);
        }
        match field {
            MicroField::Gp(u) => Ok(MicroField::Gp(self.gp_rhs(u)?)),
            MicroField::Spins(f) => Ok(MicroField::Spins(self.spin_rhs(f))),
        }
    }
}

/// Time derivative of a state in the rescaled frame.
pub fn micro_rhs(spec: &MicroModelSpec, s: &MicroState) -> Result<MicroField> {
    let sys = MicroSystem::new(spec, *s.grid(), s.eps())?;
    sys.rhs(s.field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ground_states_are_stationary() {
        let grid = Grid::new(32, 2.0 * PI).unwrap();
        for spec in [
            MicroModelSpec::GpScalar,
            MicroModelSpec::LlEasyPlane { k: 1.0 },
            MicroModelSpec::LlEasyCone { alpha: 1.2, beta: 0.5, theta0: 0.9 },
            MicroModelSpec::AfChain,
        ] {
            let s = MicroState::ground(&spec, grid, 0.3).unwrap();
            let r = micro_rhs(&spec, &s).unwrap();
            let z = match r {
                MicroField::Gp(f) => f.linf_norm(),
                MicroField::Spins(f) => f.linf_norm(),
            };
            assert!(z < 1e-12, "{}: {z}", spec.name());
        }
    }

    #[test]
    fn gp_rhs_matches_lab_frame_finite_differences() {
        // Oracle: the lab-frame GP right side i(G_yy/2 + G(1-|G|^2)) by
        // centered differences, mapped through t = eps^3 s, x = eps (y - c s).
        let eps: f64 = 0.1;
        let n = 512;
        let grid = Grid::new(n, 2.0 * PI).unwrap();
        let spec = MicroModelSpec::GpScalar;
        let phase = |x: f64| eps * 0.1 * x.sin();
        let u = ComplexField::from_fn(grid, 1, |_, x| Complex64::from_polar(1.0, phase(x)));
        let s = MicroState::new(&spec, eps, MicroField::Gp(u)).unwrap();
        let MicroField::Gp(r) = micro_rhs(&spec, &s).unwrap() else { unreachable!() };
        let h = 1e-3;
        let g = |x: f64| Complex64::from_polar(1.0, phase(x));
        let mut err: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..n {
            let x = grid.x(j);
            // G(s, y) = u(eps^3 s, eps y) at s = 0: d_y = eps d_x.
            let gx = (g(x + h) - g(x - h)) / (2.0 * h);
            let gxx = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            let gs = I * (0.5 * eps * eps * gxx + g(x) * (1.0 - g(x).norm_sqr()));
            // G_s = eps^3 u_t - c eps u_x.
            let ut = (gs + eps * gx) / eps.powi(3);
            err = err.max((ut - r.at(0, j)).norm());
            scale = scale.max(ut.norm());
        }
        assert!(err / scale < 1e-6, "relative error {}", err / scale);
    }

    #[test]
    fn af_rhs_is_the_rescaled_spin_hamiltonian_flow() {
        // Oracle: lab-frame flow u_s = -u x grad_u E, v_s = -v x grad_v E with
        // E = sum dy [-|u_y|^2/4 - |v_y|^2/4 + u.v_y - 2 u.v], the gradient
        // taken by central differences of E in each grid value.
        let eps: f64 = 0.3;
        let n = 64;
        let lab = Grid::new(n, 2.0 * PI).unwrap();
        let grid = Grid::new(n, 2.0 * PI * eps).unwrap();
        let sphere = |th: f64, ph: f64| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let sample = |y: f64| {
            let u = sphere(1.0 + 0.3 * y.sin(), 0.5 * y.cos());
            let v = sphere(PI - 1.0 + 0.2 * (2.0 * y).cos(), PI + 0.4 * y.sin());
            [u[0], u[1], u[2], v[0], v[1], v[2]]
        };
        let ys = lab.points();
        let values: Vec<[f64; 6]> = ys.iter().map(|&y| sample(y)).collect();
        let spins = RealField::from_fn(grid, 6, |c, x| sample(x / eps)[c]);
        let sys = MicroSystem::new(&MicroModelSpec::AfChain, grid, eps).unwrap();
        let r = sys.spin_nonlinear(&spins);

        let lab_sp = Spectral::new(lab);
        let dy = lab.length() / n as f64;
        let energy = |vals: &[[f64; 6]]| {
            let comp = |c: usize| vals.iter().map(|p| p[c]).collect::<Vec<f64>>();
            let mut e = 0.0;
            for m in 0..3 {
                let (u, v) = (comp(m), comp(m + 3));
                let (uy, vy) = (lab_sp.derivative_values(&u, 1), lab_sp.derivative_values(&v, 1));
                for j in 0..n {
                    e += -0.25 * (uy[j] * uy[j] + vy[j] * vy[j]) + u[j] * vy[j] - 2.0 * u[j] * v[j];
                }
            }
            e * dy
        };
        let h = 1e-5;
        let mut err: f64 = 0.0;
        for j in 0..n {
            let mut grad = [0.0; 6];
            for (c, g) in grad.iter_mut().enumerate() {
                let mut p = values.clone();
                p[j][c] += h;
                let mut m = values.clone();
                m[j][c] -= h;
                *g = (energy(&p) - energy(&m)) / (2.0 * h * dy);
            }
            let (u, v) = ([values[j][0], values[j][1], values[j][2]], [values[j][3], values[j][4], values[j][5]]);
            let us = cross(u, [grad[0], grad[1], grad[2]]);
            let vs = cross(v, [grad[3], grad[4], grad[5]]);
            // spin_nonlinear is eps^-3 G_s; the transport term is the frame shift.
            for m in 0..3 {
                err = err.max((-us[m] - eps.powi(3) * r.at(m, j)).abs());
                err = err.max((-vs[m] - eps.powi(3) * r.at(m + 3, j)).abs());
            }
        }
        assert!(err < 1e-6, "max error {err:e}");
    }

    #[test]
    fn phase_step_preserves_amplitude() {
        let grid = Grid::new(16, 4.0).unwrap();
        let sys = MicroSystem::new(&MicroModelSpec::GpScalar, grid, 0.2).unwrap();
        let mut u = ComplexField::from_fn(grid, 1, |_, x| Complex64::from_polar(1.0 + 0.1 * x.cos(), x));
        let before: Vec<f64> = u.component(0).iter().map(|z| z.norm()).collect();
        sys.gp_phase_step(&mut u, 0.37);
        for (z, a) in u.component(0).iter().zip(before) {
            assert!((z.norm() - a).abs() < 1e-15);
        }
    }

    #[test]
    fn gp_chart_breakdown_is_reported() {
        let grid = Grid::new(16, 4.0).unwrap();
        let u = ComplexField::from_fn(grid, 1, |_, x| Complex64::new(1.0 + 0.7 * x.sin(), 0.0));
        let s = MicroState::new(&MicroModelSpec::GpScalar, 0.5, MicroField::Gp(u)).unwrap();
        assert!(matches!(
            micro_rhs(&MicroModelSpec::GpScalar, &s),
            Err(Error::ChartBreakdown { .. })
        ));
    }
}
