use num_complex::Complex64;

use super::field::{Field, Sample};
use super::ops::{LinearPropagator, Spectral};
use crate::error::{Error, Result};

fn checked<T: Sample>(f: Field<T>, t: f64, stage: &str) -> Result<Field<T>> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::StepRejected {
            t,
            reason: format!("non-finite value in RK stage {stage}"),
        })
    }
}

/// One classical RK4 step of `u' = rhs(u)`. `t` only labels diagnostics.
pub fn rk4_step<T: Sample>(
    u: &Field<T>,
    rhs: impl Fn(&Field<T>) -> Result<Field<T>>,
    dt: f64,
    t: f64,
) -> Result<Field<T>> {
    let k1 = checked(rhs(u)?, t, "k1")?;
    let mut s = u.clone();
    s.axpy(0.5 * dt, &k1);
    let k2 = checked(rhs(&s)?, t, "k2")?;
    let mut s = u.clone();
    s.axpy(0.5 * dt, &k2);
    let k3 = checked(rhs(&s)?, t, "k3")?;
    let mut s = u.clone();
    s.axpy(dt, &k3);
    let k4 = checked(rhs(&s)?, t, "k4")?;
    let mut out = u.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    checked(out, t, "combination")
}

/// Integrating-factor RK4 for `u' = L u + N(u)` with Fourier-diagonal `L`.
/// Caches `exp(L dt/2)` and `exp(L dt)` for a fixed step.
#[derive(Debug, Clone)]
pub struct IfRk4 {
    sp: Spectral,
    dt: f64,
    half: LinearPropagator,
    full: LinearPropagator,
}

type Spectra = Vec<Vec<Complex64>>;

impl IfRk4 {
    pub fn new(sp: Spectral, symbol: &dyn Fn(f64) -> Complex64, dt: f64) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::param("dt", format!("must be finite and nonzero, got {dt}")));
        }
        let half = LinearPropagator::new(&sp, symbol, 0.5 * dt)?;
        let full = LinearPropagator::new(&sp, symbol, dt)?;
        Ok(Self { sp, dt, half, full })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    fn fwd<T: Sample>(&self, f: &Field<T>) -> Spectra {
        f.components().iter().map(|c| self.sp.to_spectrum(c)).collect()
    }

    fn inv<T: Sample>(&self, like: &Field<T>, s: &Spectra) -> Field<T> {
        Field::from_parts(*like.grid(), s.iter().map(|c| self.sp.from_spectrum(c)).collect())
    }

    /// `sum_i coef_i * P_i x_i` per slot, with `P_i` one of identity/half/full.
    fn combine(&self, terms: &[(f64, Prop, &Spectra)]) -> Spectra {
        let dim = terms[0].2.len();
        let n = terms[0].2[0].len();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; dim];
        for &(coef, p, x) in terms {
            let m = match p {
                Prop::Id => None,
                Prop::Half => Some(self.half.multipliers()),
                Prop::Full => Some(self.full.multipliers()),
            };
            for (o, xc) in out.iter_mut().zip(x) {
                match m {
                    None => o.iter_mut().zip(xc).for_each(|(o, v)| *o += coef * v),
                    Some(m) => o
                        .iter_mut()
                        .zip(xc)
                        .zip(m)
                        .for_each(|((o, v), e)| *o += coef * v * e),
                }
            }
        }
        out
    }

    pub fn step<T: Sample>(
        &self,
        u: &Field<T>,
        nonlinear: &dyn Fn(&Field<T>) -> Result<Field<T>>,
        t: f64,
    ) -> Result<Field<T>> {
        let dt = self.dt;
        let uh = self.fwd(u);
        let a = self.fwd(&checked(nonlinear(u)?, t, "a")?);
        let u1 = self.inv(u, &self.combine(&[(1.0, Prop::Half, &uh), (0.5 * dt, Prop::Half, &a)]));
        let b = self.fwd(&checked(nonlinear(&u1)?, t, "b")?);
        let u2 = self.inv(u, &self.combine(&[(1.0, Prop::Half, &uh), (0.5 * dt, Prop::Id, &b)]));
        let c = self.fwd(&checked(nonlinear(&u2)?, t, "c")?);
        let u3 = self.inv(u, &self.combine(&[(1.0, Prop::Full, &uh), (dt, Prop::Half, &c)]));
        let d = self.fwd(&checked(nonlinear(&u3)?, t, "d")?);
        let out = self.combine(&[
            (1.0, Prop::Full, &uh),
            (dt / 6.0, Prop::Full, &a),
            (dt / 3.0, Prop::Half, &b),
            (dt / 3.0, Prop::Half, &c),
            (dt / 6.0, Prop::Id, &d),
        ]);
        checked(self.inv(u, &out), t, "combination")
    }
}

#[derive(Debug, Clone, Copy)]
enum Prop {
    Id,
    Half,
    Full,
}

/// One integrating-factor RK4 step; builds the propagators on every call.
pub fn ifrk4_step<T: Sample>(
    u: &Field<T>,
    symbol: impl Fn(f64) -> Complex64,
    nonlinear: impl Fn(&Field<T>) -> Result<Field<T>>,
    dt: f64,
) -> Result<Field<T>> {
    let stepper = IfRk4::new(Spectral::new(*u.grid()), &symbol, dt)?;
    stepper.step(u, &nonlinear, 0.0)
}
