use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdv::QTensor;
use crate::spectral::{Grid, RealField, Spectral};

/// Profile `q(xi) = amplitude * sech^2(xi / width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SechProfile {
    pub amplitude: f64,
    pub width: f64,
}

impl SechProfile {
    /// The decaying solution of `q - q'' + q^2 = 0`.
    pub const EXACT: Self = Self { amplitude: -1.5, width: 2.0 };
    /// `q = -3 sech^2`, as usually quoted; it solves `q - q'' + q^2/2 = 0`
    /// only with `width = 2`.
    pub const QUOTED: Self = Self { amplitude: -3.0, width: 1.0 };

    pub fn eval(&self, xi: f64) -> f64 {
        self.amplitude / (xi / self.width).cosh().powi(2)
    }
}

/// Travelling wave `c q(sqrt(c)(x - x0)) z` of `u_t = u_xxx - d_x Q(u, u)`
/// (it moves left at speed `c`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub speed: f64,
    pub direction: Vec<f64>,
    pub center: f64,
    pub profile: SechProfile,
}

/// Tolerance on `|Q(z, z) - z|` for a soliton direction.
pub const DIRECTION_TOL: f64 = 1e-10;
/// Largest profile value allowed at the periodic boundary.
pub const TAIL_TOL: f64 = 1e-12;

impl SolitonSpec {
    pub fn new(q: &QTensor, speed: f64, direction: Vec<f64>, center: f64, profile: SechProfile) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::param("speed", format!("must be positive, got {speed}")));
        }
        if direction.len() != q.dim() {
            return Err(Error::DimMismatch { expected: q.dim(), got: direction.len() });
        }
        let r = q.eval(&direction, &direction);
        let defect = r.iter().zip(&direction).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if defect > DIRECTION_TOL {
            return Err(Error::param("direction", format!("|Q(z,z) - z| = {defect:e}")));
        }
        Ok(Self { speed, direction, center, profile })
    }
}

fn periodic_offset(x: f64, x0: f64, l: f64) -> f64 {
    (x - x0 + 0.5 * l).rem_euclid(l) - 0.5 * l
}

fn check_tail(p: &SechProfile, half_width: f64) -> Result<()> {
    let tail = (p.eval(half_width) / p.amplitude).abs();
    if tail > TAIL_TOL {
        return Err(Error::TailTruncation { tail });
    }
    Ok(())
}

pub fn build_soliton(spec: &SolitonSpec, grid: Grid) -> Result<RealField> {
    let c = spec.speed;
    let sc = c.sqrt();
    let l = grid.length();
    check_tail(&spec.profile, sc * 0.5 * l)?;
    let d = spec.direction.len();
    Ok(RealField::from_fn(grid, d, |k, x| {
        c * spec.profile.eval(sc * periodic_offset(x, spec.center, l)) * spec.direction[k]
    }))
}

/// `|P' - P''' + Q(P, P)'|_{L2}` for `P = q z`, `q` centered on the grid,
/// evaluated spectrally.
pub fn soliton_ode_residual(q: &QTensor, z: &[f64], profile: SechProfile, grid: Grid) -> Result<f64> {
    if z.len() != q.dim() {
        return Err(Error::DimMismatch { expected: q.dim(), got: z.len() });
    }
    let l = grid.length();
    check_tail(&profile, 0.5 * l)?;
    let p = RealField::from_fn(grid, z.len(), |k, x| profile.eval(x - 0.5 * l) * z[k]);
    let mut qpp = RealField::zeros(grid, z.len());
    for j in 0..grid.n_points() {
        let v = p.vector_at(j);
        for (k, w) in q.eval(&v, &v).into_iter().enumerate() {
            qpp.component_mut(k)[j] = w;
        }
    }
    let sp = Spectral::new(grid);
    let mut r = sp.derivative(&p, 1);
    r.axpy(-1.0, &sp.derivative(&p, 3));
    r.axpy(1.0, &sp.derivative(&qpp, 1));
    Ok(r.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(1024, 64.0 * PI).unwrap()
    }

    #[test]
    fn exact_profile_solves_the_ode() {
        let r = soliton_ode_residual(&QTensor::scalar(1.0), &[1.0], SechProfile::EXACT, grid()).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn quoted_and_wrong_profiles_do_not() {
        let q = QTensor::scalar(1.0);
        let r = soliton_ode_residual(&q, &[1.0], SechProfile::QUOTED, grid()).unwrap();
        assert!(r > 0.1, "{r}");
        let wrong = SechProfile { amplitude: -2.0, width: 1.0 };
        assert!(soliton_ode_residual(&q, &[1.0], wrong, grid()).unwrap() > 0.1);
        // The quoted amplitude with half-width 2 solves the u^2/2 normalization.
        let half = SechProfile { amplitude: -3.0, width: 2.0 };
        assert!(soliton_ode_residual(&QTensor::scalar(0.5), &[1.0], half, grid()).unwrap() < 1e-10);
    }

    #[test]
    fn built_soliton_is_a_travelling_wave() {
        // Oracle: u_t = c u_x for a leftward wave at speed c, so
        // c u_x - u_xxx + d_x(u^2) must vanish.
        let q = QTensor::scalar(1.0);
        let spec = SolitonSpec::new(&q, 1.7, vec![1.0], 100.0, SechProfile::EXACT).unwrap();
        let u = build_soliton(&spec, grid()).unwrap();
        let sp = Spectral::new(grid());
        let mut r = sp.derivative(&u, 1).scaled(1.7);
        r.axpy(-1.0, &sp.derivative(&u, 3));
        let u2 = u.map(|v| v * v);
        r.axpy(1.0, &sp.derivative(&u2, 1));
        assert!(r.l2_norm() < 1e-9, "{}", r.l2_norm());
    }

    #[test]
    fn tails_must_fit_the_box() {
        let small = Grid::new(64, 10.0).unwrap();
        let err = soliton_ode_residual(&QTensor::scalar(1.0), &[1.0], SechProfile::EXACT, small);
        assert!(matches!(err, Err(Error::TailTruncation { .. })));
    }

    #[test]
    fn bad_direction_rejected() {
        assert!(SolitonSpec::new(&QTensor::scalar(1.0), 1.0, vec![2.0], 0.0, SechProfile::EXACT).is_err());
    }
}
