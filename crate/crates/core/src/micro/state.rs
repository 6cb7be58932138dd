use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::MicroModelSpec;
use crate::spectral::{ComplexField, Grid, RealField};

/// Tolerance on `|G| = 1` for spin fields.
pub const UNIT_TOL: f64 = 1e-10;

/// Microscopic field: complex components for GP, stacked unit vectors for
/// LL (3 components) and AF (`u` in 0..3, `v` in 3..6).
#[derive(Debug, Clone, PartialEq)]
pub enum MicroField {
    Gp(ComplexField),
    Spins(RealField),
}

impl MicroField {
    pub fn grid(&self) -> &Grid {
        match self {
            Self::Gp(f) => f.grid(),
            Self::Spins(f) => f.grid(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::Gp(f) => f.is_finite(),
            Self::Spins(f) => f.is_finite(),
        }
    }

    pub fn as_gp(&self) -> Option<&ComplexField> {
        match self {
            Self::Gp(f) => Some(f),
            Self::Spins(_) => None,
        }
    }

    pub fn as_spins(&self) -> Option<&RealField> {
        match self {
            Self::Spins(f) => Some(f),
            Self::Gp(_) => None,
        }
    }

    /// Discrete L2 distance; fields must have the same flavor.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (Self::Gp(a), Self::Gp(b)) => {
                a.same_shape(b)?;
                Ok(a.sub(b).l2_norm())
            }
            (Self::Spins(a), Self::Spins(b)) => {
                a.same_shape(b)?;
                Ok(a.sub(b).l2_norm())
            }
            _ => Err(Error::param("field", "flavor mismatch")),
        }
    }
}

/// A microscopic state in the rescaled variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    eps: f64,
    field: MicroField,
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must lie in (0, 1], got {eps}")))
    }
}

/// Largest `| |G(x)| - 1 |` over the spin vectors of `f`.
pub fn unit_defect(f: &RealField) -> f64 {
    let mut worst = 0.0f64;
    for s in 0..f.dim() / 3 {
        for j in 0..f.len() {
            let r2: f64 = (0..3).map(|a| f.at(3 * s + a, j).powi(2)).sum();
            worst = worst.max((r2.sqrt() - 1.0).abs());
        }
    }
    worst
}

impl MicroState {
    /// Validates the field against the model: component count, finiteness,
    /// and unit norm for spins.
    pub fn new(spec: &MicroModelSpec, eps: f64, field: MicroField) -> Result<Self> {
        check_eps(eps)?;
        match (&field, spec.is_gp()) {
            (MicroField::Gp(f), true) => {
                if f.dim() != spec.field_count() {
                    return Err(Error::DimMismatch {
                        expected: spec.field_count(),
                        got: f.dim(),
                    });
                }
                f.check_finite("micro state")?;
            }
            (MicroField::Spins(f), false) => {
                if f.dim() != 3 * spec.field_count() {
                    return Err(Error::DimMismatch {
                        expected: 3 * spec.field_count(),
                        got: f.dim(),
                    });
                }
                f.check_finite("micro state")?;
                let d = unit_defect(f);
                if d > UNIT_TOL {
                    return Err(Error::param("field", format!("spin vectors not unit (defect {d:.3e})")));
                }
            }
            _ => return Err(Error::param("field", format!("wrong field flavor for {}", spec.name()))),
        }
        Ok(Self { eps, field })
    }

    /// Ground state at the chart base point.
    pub fn ground(spec: &MicroModelSpec, grid: Grid, eps: f64) -> Result<Self> {
        let field = match spec {
            MicroModelSpec::GpScalar | MicroModelSpec::GpCoupled { .. } => MicroField::Gp(
                ComplexField::from_fn(grid, spec.field_count(), |_, _| Complex64::new(1.0, 0.0)),
            ),
            MicroModelSpec::LlEasyPlane { .. } => {
                MicroField::Spins(RealField::from_fn(grid, 3, |c, _| if c == 0 { 1.0 } else { 0.0 }))
            }
            MicroModelSpec::LlEasyCone { theta0, .. } => {
                let (s, c) = theta0.sin_cos();
                MicroField::Spins(RealField::from_fn(grid, 3, move |k, _| [s, 0.0, c][k]))
            }
            MicroModelSpec::AfChain => MicroField::Spins(RealField::from_fn(grid, 6, |c, _| match c {
                0 => 1.0,
                3 => -1.0,
                _ => 0.0,
            })),
        };
        Self::new(spec, eps, field)
    }

    pub(crate) fn from_parts(eps: f64, field: MicroField) -> Self {
        Self { eps, field }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn field(&self) -> &MicroField {
        &self.field
    }

    pub fn into_field(self) -> MicroField {
        self.field
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn spin(f: &RealField, s: usize, j: usize) -> [f64; 3] {
    [f.at(3 * s, j), f.at(3 * s + 1, j), f.at(3 * s + 2, j)]
}

pub(crate) fn set_spin(f: &mut RealField, s: usize, j: usize, v: [f64; 3]) {
    for (a, x) in v.into_iter().enumerate() {
        f.component_mut(3 * s + a)[j] = x;
    }
}

/// Projects every spin vector back to the unit sphere.
pub fn renormalize(f: &mut RealField) {
    for s in 0..f.dim() / 3 {
        for j in 0..f.len() {
            let v = spin(f, s, j);
            let r = dot(v, v).sqrt();
            set_spin(f, s, j, [v[0] / r, v[1] / r, v[2] / r]);
        }
    }
}
