use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kdv::{evolve_kdv_with, q_apply, step_plan, KdvRunOptions, LimitModel, QTensor, Tensor3};
use crate::spectral::{IfRk4, Padding, RealField, Spectral};

/// Largest `|Q(e_i, Q(e_j, e_k)) - Q(e_j, Q(e_i, e_k))|` over basis triples.
pub fn miura_condition(q: &QTensor) -> f64 {
    let d = q.dim();
    let e = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let a = q.eval(&e(i), &q.eval(&e(j), &e(k)));
                let b = q.eval(&e(j), &q.eval(&e(i), &e(k)));
                let diff = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(diff);
            }
        }
    }
    worst
}

/// Condition tolerance for using the transform.
pub const MIURA_TOL: f64 = 1e-10;

fn require_condition(q: &QTensor) -> Result<()> {
    let violation = miura_condition(q);
    if violation > MIURA_TOL {
        return Err(Error::MiuraCondition { violation, tolerance: MIURA_TOL });
    }
    Ok(())
}

/// `u = v_x + Q(v, v)/3`.
pub fn miura_map(q: &QTensor, v: &RealField) -> Result<RealField> {
    require_condition(q)?;
    let sp = Spectral::new(*v.grid());
    let mut u = sp.derivative(v, 1);
    u.axpy(1.0 / 3.0, &q_apply(q, v, v)?);
    Ok(u)
}

/// `-2/3 Q(v, Q(v, v_x))`, dealiased on the 2N grid.
fn mkdv_nonlinear(sp: &Spectral, q: &QTensor, v: &RealField) -> RealField {
    let d = q.dim();
    let vh: Vec<Vec<Complex64>> = v.components().iter().map(|c| sp.to_spectrum(c)).collect();
    let ik = sp.derivative_multiplier(1);
    let pv: Vec<Vec<f64>> = vh.iter().map(|s| sp.pad_real(s, Padding::Cubic)).collect();
    let px: Vec<Vec<f64>> = vh
        .iter()
        .map(|s| {
            let sx: Vec<Complex64> = s.iter().zip(&ik).map(|(a, b)| a * b).collect();
            sp.pad_real(&sx, Padding::Cubic)
        })
        .collect();
    let m = pv[0].len();
    let mut out = vec![vec![0.0; m]; d];
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    for p in 0..m {
        for c in 0..d {
            a[c] = pv[c][p];
            b[c] = px[c][p];
        }
        let inner = q.eval(&a, &b);
        for (c, w) in q.eval(&a, &inner).into_iter().enumerate() {
            out[c][p] = -2.0 / 3.0 * w;
        }
    }
    let comps = out.iter().map(|c| sp.from_spectrum(&sp.unpad(c, Padding::Cubic))).collect();
    RealField::new(*v.grid(), comps).expect("same grid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiuraReport {
    pub times: Vec<f64>,
    /// `|miura_map(v(t)) - u(t)|_{L2}`.
    pub discrepancy: Vec<f64>,
    pub sup: f64,
}

/// Evolves `v0` under `v_t = v_xxx - 2/3 Q(v, Q(v, v_x))` and `miura_map(v0)`
/// under `u_t = u_xxx - d_x Q(u, u)`, both with integrating-factor RK4 and
/// the same step, and compares at `outputs` equally spaced times.
pub fn miura_crosscheck(q: &QTensor, v0: &RealField, t_final: f64, dt: f64, outputs: usize) -> Result<MiuraReport> {
    require_condition(q)?;
    if v0.dim() != q.dim() {
        return Err(Error::DimMismatch { expected: q.dim(), got: v0.dim() });
    }
    let outputs = outputs.max(1);
    let (steps, _) = step_plan(t_final, dt)?;
    let per = steps.div_ceil(outputs).max(1);
    let steps = per * outputs;
    let dt = t_final / steps as f64;

    let sp = Spectral::new(*v0.grid());
    let model = LimitModel::canonical(q.clone(), 1.0)?;
    let symbol = |k: f64| model.linear_symbol(k);
    let stepper = IfRk4::new(sp.clone(), &symbol, dt)?;
    let nonlinear = |v: &RealField| Ok(mkdv_nonlinear(&sp, q, v));

    let u0 = miura_map(q, v0)?;
    let kdv = evolve_kdv_with(&model, &u0, &KdvRunOptions::new(t_final, dt).snapshots(per).blowup(None))?;
    if !kdv.completed() {
        return Err(Error::NoConvergence("KdV side of the Miura crosscheck broke down".into()));
    }

    let mut report = MiuraReport { times: vec![0.0], discrepancy: vec![0.0], sup: 0.0 };
    let mut v = v0.clone();
    for n in 1..=steps {
        v = stepper.step(&v, &nonlinear, (n - 1) as f64 * dt)?;
        if n % per == 0 {
            let idx = n / per;
            let d = miura_map(q, &v)?.sub(&kdv.snapshots[idx]).l2_norm();
            report.times.push(n as f64 * dt);
            report.discrepancy.push(d);
            report.sup = report.sup.max(d);
        }
    }
    Ok(report)
}

/// The `d = 2` family `Q(x, y) = a x y + b conj(x y) + conj(a)(conj(x) y + x conj(y))`
/// on `R^2 = C`.
pub fn complex_q_d2(alpha: Complex64, beta: Complex64) -> Result<QTensor> {
    let basis = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    let t = Tensor3::from_fn(2, |i, j, k| {
        let (x, y) = (basis[i], basis[j]);
        let v = alpha * x * y + beta * (x * y).conj() + alpha.conj() * (x.conj() * y + x * y.conj());
        [v.re, v.im][k]
    });
    QTensor::new(t)
}
