use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tensor::{QTensor, Tensor3, SYMMETRY_TOL};
use crate::error::{Error, Result};
use crate::spectral::{Padding, RealField, Spectral};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which right-hand side [`kdv_rhs`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `du/dt = delta u_xxx + a u_x - d_x Q(u,u)`.
    Canonical,
    /// `2c dA/dt = 1/4 A_xxx + R(A_x, A)`, evaluated divided by `2c`.
    Raw,
}

/// Un-rescaled limit equation: `r[i][j][k]` multiplies `(A_x)_i A_j` in
/// component `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawForm {
    pub c: f64,
    pub r: Tensor3,
}

/// Affine map between raw and canonical variables:
/// `t' = time_scale * t`, `u = amplitude * A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaling {
    pub time_scale: f64,
    pub amplitude: f64,
}

impl Rescaling {
    /// For `2c A_t = 1/4 A_xxx + R(A_x, A)` with totally symmetric `R`, the
    /// map `t' = t/(8c)`, `u = -s A` gives `u_t' = u_xxx - d_x Q(u,u)` with
    /// `Q = (2/s) R`. `s` is twice the signed largest entry of `R`, so the
    /// largest entry of `Q` is `+1`; `s = 1` when `R = 0`.
    pub fn for_raw(c: f64, r: &Tensor3) -> Self {
        let r_star = r.signed_max();
        let s = if r_star == 0.0 { 1.0 } else { 2.0 * r_star };
        Self {
            time_scale: 1.0 / (8.0 * c),
            amplitude: -s,
        }
    }

    fn s(&self) -> f64 {
        -self.amplitude
    }

    pub fn canonical_tensor(&self, r: &Tensor3) -> Tensor3 {
        r.scaled(2.0 / self.s())
    }

    pub fn raw_tensor(&self, q: &Tensor3) -> Tensor3 {
        q.scaled(self.s() / 2.0)
    }

    pub fn canonical_time(&self, t: f64) -> f64 {
        t * self.time_scale
    }

    pub fn raw_time(&self, t_canonical: f64) -> f64 {
        t_canonical / self.time_scale
    }

    pub fn to_canonical(&self, a: &RealField) -> RealField {
        a.scaled(self.amplitude)
    }

    pub fn to_raw(&self, u: &RealField) -> RealField {
        u.scaled(1.0 / self.amplitude)
    }
}

/// A vector KdV equation, in canonical or raw form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitModel {
    dim: usize,
    dispersion: f64,
    advection: f64,
    form: Form,
    raw: Option<RawForm>,
    canonical_q: Option<QTensor>,
    rescaling: Option<Rescaling>,
    diagnostic: Option<String>,
}

impl LimitModel {
    pub fn canonical(q: QTensor, dispersion: f64) -> Result<Self> {
        if !dispersion.is_finite() {
            return Err(Error::param("dispersion", "must be finite"));
        }
        Ok(Self {
            dim: q.dim(),
            dispersion,
            advection: 0.0,
            form: Form::Canonical,
            raw: None,
            canonical_q: Some(q),
            rescaling: None,
            diagnostic: None,
        })
    }

    /// Raw model `2c A_t = 1/4 A_xxx + R(A_x, A)`. The canonical form is
    /// attached when `R` is totally symmetric; otherwise the model stays
    /// raw-only and records why.
    pub fn from_raw(c: f64, r: Tensor3) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("c", format!("sound speed must be positive, got {c}")));
        }
        if !r.is_finite() {
            return Err(Error::param("raw_nonlinearity", "non-finite coefficient"));
        }
        let defect = r.symmetry_defect();
        let scale = r.max_abs();
        let (canonical_q, rescaling, diagnostic) = if defect <= SYMMETRY_TOL * scale.max(1e-300) {
            let resc = Rescaling::for_raw(c, &r);
            let q = QTensor::symmetrized(resc.canonical_tensor(&r));
            (Some(q), Some(resc), None)
        } else {
            (
                None,
                None,
                Some(format!(
                    "raw nonlinearity is not totally symmetric (defect {defect:.3e}, scale {scale:.3e}); \
                     Hamiltonian and Miura tools are unavailable"
                )),
            )
        };
        Ok(Self {
            dim: r.dim(),
            dispersion: 0.25 / (2.0 * c),
            advection: 0.0,
            form: Form::Raw,
            raw: Some(RawForm { c, r }),
            canonical_q,
            rescaling,
            diagnostic,
        })
    }

    pub fn with_advection(mut self, a: f64) -> Self {
        self.advection = a;
        self
    }

    /// The same equation in canonical variables (`delta = 1`).
    pub fn to_canonical(&self) -> Result<Self> {
        match self.form {
            Form::Canonical => Ok(self.clone()),
            Form::Raw => {
                let q = self.require_canonical()?.clone();
                let resc = self.rescaling.expect("rescaling present with canonical q");
                Ok(Self {
                    dim: self.dim,
                    dispersion: 1.0,
                    advection: self.advection / resc.time_scale,
                    form: Form::Canonical,
                    raw: self.raw.clone(),
                    canonical_q: Some(q),
                    rescaling: Some(resc),
                    diagnostic: None,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `u_xxx` in the evaluated right-hand side.
    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn advection(&self) -> f64 {
        self.advection
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn raw(&self) -> Option<&RawForm> {
        self.raw.as_ref()
    }

    pub fn canonical_q(&self) -> Option<&QTensor> {
        self.canonical_q.as_ref()
    }

    pub fn rescaling(&self) -> Option<Rescaling> {
        self.rescaling
    }

    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    pub fn require_canonical(&self) -> Result<&QTensor> {
        self.canonical_q.as_ref().ok_or_else(|| {
            Error::NotCanonical(
                self.diagnostic
                    .clone()
                    .unwrap_or_else(|| "no canonical form attached".into()),
            )
        })
    }

    /// Fourier symbol of the linear part.
    pub fn linear_symbol(&self, k: f64) -> Complex64 {
        let ik = I * k;
        self.dispersion * ik * ik * ik + self.advection * ik
    }

    pub fn is_linear(&self) -> bool {
        match self.form {
            Form::Canonical => self.canonical_q.as_ref().is_none_or(|q| q.is_zero()),
            Form::Raw => self.raw.as_ref().is_none_or(|r| r.r.max_abs() == 0.0),
        }
    }
}

fn spectra(sp: &Spectral, f: &RealField) -> Vec<Vec<Complex64>> {
    f.components().iter().map(|c| sp.to_spectrum(c)).collect()
}

/// N-point spectra of `T(x, y)` computed on the padded grid.
pub(crate) fn bilinear_spectra(
    sp: &Spectral,
    t: &Tensor3,
    x: &[Vec<Complex64>],
    y: Option<&[Vec<Complex64>]>,
    pad: Padding,
) -> Vec<Vec<Complex64>> {
    let d = t.dim();
    let px: Vec<Vec<f64>> = x.iter().map(|s| sp.pad_real(s, pad)).collect();
    let py: Vec<Vec<f64>> = match y {
        Some(y) => y.iter().map(|s| sp.pad_real(s, pad)).collect(),
        None => px.clone(),
    };
    let m = px[0].len();
    let mut out = vec![vec![0.0; m]; d];
    let mut xv = vec![0.0; d];
    let mut yv = vec![0.0; d];
    let mut ov = vec![0.0; d];
    for p in 0..m {
        for i in 0..d {
            xv[i] = px[i][p];
            yv[i] = py[i][p];
        }
        t.apply_into(&xv, &yv, &mut ov);
        for k in 0..d {
            out[k][p] = ov[k];
        }
    }
    out.iter().map(|c| sp.unpad(c, pad)).collect()
}

fn check_pair(q_dim: usize, u: &RealField, v: &RealField) -> Result<()> {
    u.same_shape(v)?;
    if u.dim() != q_dim {
        return Err(Error::DimMismatch {
            expected: q_dim,
            got: u.dim(),
        });
    }
    u.check_finite("q_apply u")?;
    v.check_finite("q_apply v")
}

/// Dealiased `Q(u, v)` on the grid.
pub fn q_apply(q: &QTensor, u: &RealField, v: &RealField) -> Result<RealField> {
    check_pair(q.dim(), u, v)?;
    let sp = Spectral::new(*u.grid());
    let out = bilinear_spectra(
        &sp,
        q.tensor(),
        &spectra(&sp, u),
        Some(&spectra(&sp, v)),
        Padding::Quadratic,
    );
    Ok(RealField::new(*u.grid(), out.iter().map(|s| sp.from_spectrum(s)).collect())?)
}

/// Evaluator for one model on one grid; reuses FFT plans across calls.
#[derive(Debug, Clone)]
pub struct KdvOperator {
    sp: Spectral,
    model: LimitModel,
    ik: Vec<Complex64>,
}

impl KdvOperator {
    pub fn new(model: LimitModel, sp: Spectral) -> Self {
        let ik = sp.derivative_multiplier(1);
        Self { sp, model, ik }
    }

    pub fn model(&self) -> &LimitModel {
        &self.model
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    /// Nonlinear part of the right-hand side.
    pub fn nonlinear(&self, u: &RealField) -> Result<RealField> {
        let d = self.model.dim;
        if self.model.is_linear() {
            return Ok(RealField::zeros(*u.grid(), d));
        }
        let uh = spectra(&self.sp, u);
        let (mut out, scale) = match self.model.form {
            Form::Canonical => {
                let q = self.model.require_canonical()?;
                let mut s = bilinear_spectra(&self.sp, q.tensor(), &uh, None, Padding::Quadratic);
                for c in s.iter_mut() {
                    c.iter_mut().zip(&self.ik).for_each(|(v, m)| *v *= m);
                }
                (s, -1.0)
            }
            Form::Raw => {
                let raw = self.model.raw.as_ref().expect("raw form has raw data");
                let ux: Vec<Vec<Complex64>> = uh
                    .iter()
                    .map(|c| c.iter().zip(&self.ik).map(|(v, m)| v * m).collect())
                    .collect();
                let s = bilinear_spectra(&self.sp, &raw.r, &ux, Some(&uh), Padding::Quadratic);
                (s, 1.0 / (2.0 * raw.c))
            }
        };
        for c in out.iter_mut() {
            c.iter_mut().for_each(|v| *v *= scale);
        }
        Ok(RealField::from_parts(
            *u.grid(),
            out.iter().map(|s| self.sp.from_spectrum(s)).collect(),
        ))
    }

    pub fn linear(&self, u: &RealField) -> RealField {
        let mult = self.sp.multiplier(|k| self.model.linear_symbol(k));
        self.sp.apply_multiplier(u, &mult)
    }

    pub fn rhs(&self, u: &RealField) -> Result<RealField> {
        let mut out = self.linear(u);
        out.axpy(1.0, &self.nonlinear(u)?);
        Ok(out)
    }
}

/// Right-hand side of the model at `u`.
pub fn kdv_rhs(model: &LimitModel, u: &RealField) -> Result<RealField> {
    if u.dim() != model.dim {
        return Err(Error::DimMismatch {
            expected: model.dim,
            got: u.dim(),
        });
    }
    u.check_finite("kdv_rhs input")?;
    KdvOperator::new(model.clone(), Spectral::new(*u.grid())).rhs(u)
}
