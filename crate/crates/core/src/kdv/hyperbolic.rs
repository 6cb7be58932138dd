use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::tensor::QTensor;
use crate::error::{Error, Result};

/// One eigenpair of the flux Jacobian `2Q(u, .)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub eigenvalue: f64,
    /// Unit eigenvector.
    pub vector: Vec<f64>,
    /// `D lambda . r = 2 Q(r, r) . r`, or `None` when the mode sits in a
    /// cluster on which the cubic form does not vanish identically.
    pub d_lambda_r: Option<f64>,
    /// Indices (into the returned list) of eigenvalues tied with this one.
    pub cluster: Vec<usize>,
    pub linearly_degenerate: bool,
}

/// Flux Jacobian `J[k][j] = 2 sum_i c[i][j][k] u_i`.
pub fn flux_jacobian(q: &QTensor, u: &[f64]) -> DMatrix<f64> {
    let d = q.dim();
    DMatrix::from_fn(d, d, |k, j| 2.0 * (0..d).map(|i| q.coeff(i, j, k) * u[i]).sum::<f64>())
}

/// Eigen-decomposition of `2Q(u, .)` with the genuine-nonlinearity
/// coefficient of each field. Eigenvalues within `tol * (1 + max|lambda|)` are
/// grouped; a grouped mode gets a value only if `Q(a, b) . c` vanishes on the
/// whole eigenspace.
pub fn genuine_nonlinearity(q: &QTensor, u: &[f64], tol: f64) -> Result<Vec<EigenReport>> {
    let d = q.dim();
    if u.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            got: u.len(),
        });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("u", "non-finite state"));
    }
    let jac = flux_jacobian(q, u);
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigen solver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let qscale = q.norm().max(1e-300);
    let mut out = Vec::with_capacity(d);
    for a in 0..d {
        let cluster: Vec<usize> = (0..d)
            .filter(|&b| b != a && (vals[a] - vals[b]).abs() <= tol * scale)
            .collect();
        let value = 2.0 * q.form(&vecs[a], &vecs[a], &vecs[a]);
        let d_lambda_r = if cluster.is_empty() {
            Some(value)
        } else {
            let mut members = cluster.clone();
            members.push(a);
            let vanishes = members.iter().all(|&i| {
                members.iter().all(|&j| {
                    members
                        .iter()
                        .all(|&k| q.form(&vecs[i], &vecs[j], &vecs[k]).abs() <= tol * qscale)
                })
            });
            vanishes.then_some(0.0)
        };
        out.push(EigenReport {
            eigenvalue: vals[a],
            vector: vecs[a].clone(),
            linearly_degenerate: d_lambda_r.is_some_and(|v| v.abs() <= tol * qscale.max(1.0)),
            d_lambda_r,
            cluster,
        });
    }
    Ok(out)
}
