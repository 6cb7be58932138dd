use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `d x d x d` real array, indexed `[i][j][k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    dim: usize,
    c: Vec<f64>,
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            c: vec![0.0; dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    t.set(i, j, k, f(i, j, k));
                }
            }
        }
        t
    }

    /// Nested `[i][j][k]` input; every level must have length `d`.
    pub fn from_nested(rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::param("tensor", "empty"));
        }
        for m in rows {
            if m.len() != d || m.iter().any(|r| r.len() != d) {
                return Err(Error::param("tensor", "not a cubic d x d x d array"));
            }
        }
        Ok(Self::from_fn(d, |i, j, k| rows[i][j][k]))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| self.get(i, j, k)).collect()).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.idx(i, j, k);
        self.c[n] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entry of largest magnitude, with its sign; the first one wins ties.
    pub fn signed_max(&self) -> f64 {
        self.c
            .iter()
            .copied()
            .fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.c
            .iter()
            .zip(&other.c)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Average over the six index permutations.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.dim, |i, j, k| {
            let ix = [i, j, k];
            PERMS
                .iter()
                .map(|p| self.get(ix[p[0]], ix[p[1]], ix[p[2]]))
                .sum::<f64>()
                / 6.0
        })
    }

    /// Max deviation between any entry and its permuted partners.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.get(i, j, k);
                    let ix = [i, j, k];
                    for p in &PERMS[1..] {
                        m = m.max((v - self.get(ix[p[0]], ix[p[1]], ix[p[2]])).abs());
                    }
                }
            }
        }
        m
    }

    /// Pointwise bilinear map: `out_k = sum_ij c[i][j][k] x_i y_j`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += self.c[(i * d + j) * d + k] * xy;
                }
            }
        }
        out
    }

    /// Same as [`Tensor3::apply`], writing into `out`.
    pub(crate) fn apply_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..d {
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += self.c[base + k] * xy;
                }
            }
        }
    }

    /// Change of basis by an orthogonal matrix `o` (row-major, `d x d`):
    /// `c'[a][b][e] = sum o[i][a] o[j][b] o[k][e] c[i][j][k]`.
    pub fn rotated(&self, o: &[Vec<f64>]) -> Self {
        let d = self.dim;
        Self::from_fn(d, |a, b, e| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        s += o[i][a] * o[j][b] * o[k][e] * self.get(i, j, k);
                    }
                }
            }
            s
        })
    }
}

/// Fully symmetric trilinear form `Q(u, v) . w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTensor {
    t: Tensor3,
    /// Symmetry defect of the array this tensor was built from.
    input_defect: f64,
}

/// Relative defect accepted by [`QTensor::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

impl QTensor {
    /// Accepts arrays symmetric up to `SYMMETRY_TOL * max|c|` and stores the
    /// exact symmetrization.
    pub fn new(t: Tensor3) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::param("q", "non-finite coefficient"));
        }
        let defect = t.symmetry_defect();
        if defect > SYMMETRY_TOL * t.max_abs().max(1.0) {
            return Err(Error::NotCanonical(format!(
                "coefficient array is not totally symmetric (defect {defect:.3e})"
            )));
        }
        Ok(Self::symmetrized(t))
    }

    /// Symmetrizes any finite array, recording its defect.
    pub fn symmetrized(t: Tensor3) -> Self {
        let input_defect = t.symmetry_defect();
        Self {
            t: t.symmetrized(),
            input_defect,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            t: Tensor3::zeros(dim),
            input_defect: 0.0,
        }
    }

    /// Scalar `Q(u, u) = q u^2`.
    pub fn scalar(q: f64) -> Self {
        Self {
            t: Tensor3::from_fn(1, |_, _, _| q),
            input_defect: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.t.get(i, j, k)
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.t
    }

    pub fn input_defect(&self) -> f64 {
        self.input_defect
    }

    pub fn norm(&self) -> f64 {
        self.t.max_abs()
    }

    pub fn is_zero(&self) -> bool {
        self.t.max_abs() == 0.0
    }

    /// `Q(x, y)` for pointwise vectors.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.t.apply(x, y)
    }

    /// `Q(x, y) . z`.
    pub fn form(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        self.eval(x, y).iter().zip(z).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            t: self.t.scaled(s),
            input_defect: self.input_defect * s.abs(),
        }
    }

    pub fn rotated(&self, o: &[Vec<f64>]) -> Self {
        Self::symmetrized(self.t.rotated(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrization_is_idempotent_and_exact() {
        let t = Tensor3::from_fn(3, |i, j, k| (i * 7 + j * 3 + k) as f64 * 0.1);
        assert!(t.symmetry_defect() > 0.1);
        let s = t.symmetrized();
        assert!(s.symmetry_defect() < 1e-15);
        assert!(s.symmetrized().max_abs_diff(&s) < 1e-15);
        assert!(QTensor::new(t.clone()).is_err());
        assert!(QTensor::symmetrized(t).input_defect() > 0.1);
    }

    #[test]
    fn scalar_apply() {
        let q = QTensor::scalar(1.0);
        assert_eq!(q.eval(&[2.0], &[2.0]), vec![4.0]);
        assert_eq!(q.form(&[2.0], &[3.0], &[0.5]), 3.0);
    }

    #[test]
    fn nested_round_trip() {
        let t = Tensor3::from_fn(2, |i, j, k| (i + 2 * j + 4 * k) as f64);
        assert_eq!(Tensor3::from_nested(&t.to_nested()).unwrap(), t);
        assert!(Tensor3::from_nested(&[vec![vec![1.0, 2.0]]]).is_err());
    }

    #[test]
    fn signed_max_keeps_sign() {
        let t = Tensor3::from_fn(2, |i, _, _| if i == 0 { 0.5 } else { -3.0 });
        assert_eq!(t.signed_max(), -3.0);
    }
}
