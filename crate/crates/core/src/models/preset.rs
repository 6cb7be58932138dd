use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{identity, GeometryData};
use crate::error::{Error, Result};
use crate::kdv::{LimitModel, Tensor3};

/// The microscopic models with built-in geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MicroModelSpec {
    /// `i G_t = -1/2 G_xx - G (1 - |G|^2)`.
    GpScalar,
    /// `d` Gross-Pitaevskii components with unit ground amplitudes and
    /// `V = lambda |s|^2 + 1/3 F(s, s) . s`, `s_k = |G_k| - 1`.
    GpCoupled { lambda: f64, f: Vec<Vec<Vec<f64>>> },
    /// Landau-Lifshitz with `V = K G_3^2`.
    LlEasyPlane { k: f64 },
    /// Landau-Lifshitz with minima on `G_3 = cos theta0`.
    LlEasyCone { alpha: f64, beta: f64, theta0: f64 },
    /// Antiferromagnetic chain on `S^2 x S^2`.
    AfChain,
}

impl MicroModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GpScalar => "gp_scalar",
            Self::GpCoupled { .. } => "gp_coupled",
            Self::LlEasyPlane { .. } => "ll_easy_plane",
            Self::LlEasyCone { .. } => "ll_easy_cone",
            Self::AfChain => "af_chain",
        }
    }

    /// Number of complex components (GP) or unit vectors (LL, AF).
    pub fn field_count(&self) -> usize {
        match self {
            Self::GpScalar | Self::LlEasyPlane { .. } | Self::LlEasyCone { .. } => 1,
            Self::GpCoupled { f, .. } => f.len(),
            Self::AfChain => 2,
        }
    }

    pub fn is_gp(&self) -> bool {
        matches!(self, Self::GpScalar | Self::GpCoupled { .. })
    }

    /// Coupling tensor of the coupled GP model.
    pub fn coupling(&self) -> Option<Result<Tensor3>> {
        match self {
            Self::GpCoupled { f, .. } => Some(Tensor3::from_nested(f)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::GpScalar | Self::AfChain => Ok(()),
            Self::GpCoupled { lambda, ref f } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
                }
                let t = Tensor3::from_nested(f)?;
                check_f_symmetric(&t)
            }
            Self::LlEasyPlane { k } => {
                if !(k.is_finite() && k > 0.0) {
                    return Err(Error::param("k", format!("anisotropy must be positive, got {k}")));
                }
                Ok(())
            }
            Self::LlEasyCone { alpha, beta, theta0 } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
                }
                if !beta.is_finite() {
                    return Err(Error::param("beta", "must be finite"));
                }
                if !(theta0 > 0.0 && theta0 < PI) {
                    return Err(Error::param("theta0", format!("must lie in (0, pi), got {theta0}")));
                }
                Ok(())
            }
        }
    }

    /// Radius of the chart `eps phi -> Phi(eps phi)` in the `phi` variable
    /// scaled by `eps`.
    pub fn chart_radius(&self) -> f64 {
        match *self {
            Self::GpScalar | Self::GpCoupled { .. } | Self::LlEasyPlane { .. } => PI,
            Self::LlEasyCone { theta0, .. } => PI * theta0.sin(),
            Self::AfChain => PI * 2f64.sqrt(),
        }
    }

    /// Size of the potential coefficients; the stiff rate of the rescaled
    /// flow is about `2 stiffness / eps^3`.
    pub fn stiffness(&self) -> f64 {
        match self {
            Self::GpScalar => 1.0,
            Self::GpCoupled { lambda, f } => {
                lambda + f.iter().flatten().flatten().map(|v| v.abs()).fold(0.0, f64::max)
            }
            Self::LlEasyPlane { k } => *k,
            Self::LlEasyCone { alpha, beta, .. } => alpha + beta.abs(),
            Self::AfChain => 2.0,
        }
    }
}

/// Cubic coefficient `b` of the easy-cone potential along the meridian.
pub fn easy_cone_b(alpha: f64, beta: f64, theta0: f64) -> f64 {
    let (s, c) = theta0.sin_cos();
    alpha * s * c + beta * s.powi(3)
}

fn check_f_symmetric(f: &Tensor3) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::param("f", "non-finite coefficient"));
    }
    let d = f.dim();
    let scale = f.max_abs().max(1.0);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if (f.get(i, j, k) - f.get(j, i, k)).abs() > 1e-12 * scale {
                    return Err(Error::param("f", "F_1 must be symmetric in its two arguments"));
                }
            }
        }
    }
    Ok(())
}

fn scalar(v: f64) -> Tensor3 {
    Tensor3::from_fn(1, |_, _, _| v)
}

/// Geometry of a preset together with its validated descriptor.
pub fn preset(spec: MicroModelSpec) -> Result<(GeometryData, MicroModelSpec)> {
    spec.validate()?;
    let g = match spec {
        MicroModelSpec::GpScalar => {
            GeometryData::new(1.0, 0.0, vec![vec![0.0]], scalar(-1.0), scalar(3.0), vec![vec![1.0]])?
        }
        MicroModelSpec::GpCoupled { lambda, ref f } => {
            let f = Tensor3::from_nested(f)?;
            let d = f.dim();
            let ii = Tensor3::from_fn(d, |i, j, k| if i == j && j == k { -1.0 } else { 0.0 });
            GeometryData::new(lambda, 0.0, vec![vec![0.0; d]; d], ii, f, identity(d))?
        }
        MicroModelSpec::LlEasyPlane { k } => {
            GeometryData::new(k, 0.0, vec![vec![0.0]], scalar(0.0), scalar(0.0), vec![vec![-1.0]])?
        }
        MicroModelSpec::LlEasyCone { alpha, beta, theta0 } => {
            let lambda = alpha * theta0.sin().powi(2);
            let b = easy_cone_b(alpha, beta, theta0);
            let cot = theta0.cos() / theta0.sin();
            GeometryData::new(lambda, 0.0, vec![vec![0.0]], scalar(cot), scalar(-3.0 * b), vec![vec![-1.0]])?
        }
        MicroModelSpec::AfChain => GeometryData::new(
            2.0,
            1.0,
            vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            Tensor3::zeros(2),
            Tensor3::zeros(2),
            identity(2),
        )?,
    };
    Ok((g, spec))
}

/// Raw limit equation `2c A_t = 1/4 A_xxx + R(A_x, A)` of a geometry.
pub fn limit_equation(g: &GeometryData) -> Result<LimitModel> {
    LimitModel::from_raw(g.c(), g.raw_tensor())
}

/// `2c rho_t = 1/4 rho_xxx - 3/2 rho_k (rho_k)_x - F(rho, rho_x)/(2 lambda)`,
/// `c = sqrt(lambda)`, assembled directly from the component form.
pub fn coupled_gp_limit(lambda: f64, f: &Tensor3) -> Result<LimitModel> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    check_f_symmetric(f)?;
    let d = f.dim();
    let r = Tensor3::from_fn(d, |i, j, k| {
        let diag = if i == j && j == k { -1.5 } else { 0.0 };
        diag - f.get(j, i, k) / (2.0 * lambda)
    });
    LimitModel::from_raw(lambda.sqrt(), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdv::Form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn raw_r(m: &LimitModel) -> &Tensor3 {
        &m.raw().unwrap().r
    }

    #[test]
    fn gp_scalar_constants_and_coefficient() {
        let (g, _) = preset(MicroModelSpec::GpScalar).unwrap();
        assert_eq!((g.lambda(), g.mu(), g.c()), (1.0, 0.0, 1.0));
        let m = limit_equation(&g).unwrap();
        assert_eq!(raw_r(&m).get(0, 0, 0), -3.0);
        assert_eq!(m.form(), Form::Raw);
        assert!(m.canonical_q().is_some());
    }

    #[test]
    fn airy_models_have_zero_nonlinearity() {
        for spec in [MicroModelSpec::LlEasyPlane { k: 0.7 }, MicroModelSpec::AfChain] {
            let (g, _) = preset(spec).unwrap();
            let m = limit_equation(&g).unwrap();
            assert_eq!(raw_r(&m).max_abs(), 0.0);
            assert!(m.canonical_q().unwrap().is_zero());
        }
        let (g, _) = preset(MicroModelSpec::AfChain).unwrap();
        assert_eq!((g.lambda(), g.mu(), g.c()), (2.0, 1.0, 1.0));
        let (g, _) = preset(MicroModelSpec::LlEasyPlane { k: 0.7 }).unwrap();
        assert_eq!(g.lambda(), 0.7);
    }

    #[test]
    fn easy_cone_coefficient_on_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let alpha = rng.gen_range(0.2..3.0);
            let beta = rng.gen_range(-2.0..2.0);
            let theta0 = rng.gen_range(0.2..PI - 0.2);
            let (g, _) = preset(MicroModelSpec::LlEasyCone { alpha, beta, theta0 }).unwrap();
            let lambda = alpha * theta0.sin().powi(2);
            let b = alpha * theta0.sin() * theta0.cos() + beta * theta0.sin().powi(3);
            let want = 1.5 / theta0.tan() + 3.0 * b / (2.0 * lambda);
            let got = raw_r(&limit_equation(&g).unwrap()).get(0, 0, 0);
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn easy_cone_at_equator_is_easy_plane() {
        let (g, _) = preset(MicroModelSpec::LlEasyCone { alpha: 1.3, beta: 0.0, theta0: PI / 2.0 }).unwrap();
        assert!((g.lambda() - 1.3).abs() < 1e-15);
        assert!(raw_r(&limit_equation(&g).unwrap()).max_abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(preset(MicroModelSpec::LlEasyPlane { k: 0.0 }).is_err());
        assert!(preset(MicroModelSpec::LlEasyCone { alpha: 1.0, beta: 0.0, theta0: 0.0 }).is_err());
        assert!(preset(MicroModelSpec::GpCoupled { lambda: -1.0, f: vec![vec![vec![0.0]]] }).is_err());
    }

    #[test]
    fn coupled_gp_paths_agree() {
        let m1 = coupled_gp_limit(1.0, &scalar(3.0)).unwrap();
        let (g, _) = preset(MicroModelSpec::GpScalar).unwrap();
        let m0 = limit_equation(&g).unwrap();
        assert_eq!(m1, m0);

        let f = Tensor3::from_fn(2, |i, j, k| [0.5, -0.2, 0.8, 1.1][i + j + k]);
        let lambda = 1.7;
        let direct = coupled_gp_limit(lambda, &f).unwrap();
        let (g, _) = preset(MicroModelSpec::GpCoupled { lambda, f: f.to_nested() }).unwrap();
        let general = limit_equation(&g).unwrap();
        assert!(raw_r(&direct).max_abs_diff(raw_r(&general)) < 1e-15);
        assert!((direct.raw().unwrap().c - lambda.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn decoupled_components() {
        let m = coupled_gp_limit(1.0, &Tensor3::zeros(2)).unwrap();
        let r = raw_r(&m);
        assert_eq!(r.get(0, 0, 0), -1.5);
        assert_eq!(r.get(1, 1, 1), -1.5);
        assert_eq!(r.get(0, 1, 1), 0.0);
    }

    #[test]
    fn non_potential_coupling_stays_raw() {
        // Symmetric in the first two slots but not totally symmetric.
        let mut f = Tensor3::zeros(2);
        f.set(1, 1, 0, 1.0);
        f.set(0, 0, 1, 1.0);
        let m = coupled_gp_limit(1.0, &f).unwrap();
        assert!(m.canonical_q().is_none());
        assert!(m.diagnostic().unwrap().contains("not totally symmetric"));
        let mut bad = Tensor3::zeros(2);
        bad.set(0, 1, 0, 1.0);
        assert!(coupled_gp_limit(1.0, &bad).is_err());
    }
}
