use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdv::Tensor3;

/// Row-major square matrix.
pub type Mat = Vec<Vec<f64>>;

const TOL: f64 = 1e-10;

pub(crate) fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

pub(crate) fn mat_vec(m: &Mat, x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub(crate) fn mat_t_vec(m: &Mat, x: &[f64]) -> Vec<f64> {
    let d = m.len();
    (0..d).map(|j| (0..d).map(|i| m[i][j] * x[i]).sum()).collect()
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

fn check_square(name: &'static str, m: &Mat, d: usize) -> Result<()> {
    if m.len() != d || m.iter().any(|r| r.len() != d) {
        return Err(Error::param(name, format!("expected a {d} x {d} matrix")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::param(name, "non-finite entry"));
    }
    Ok(())
}

/// Constants of a model at the base point of its Lagrangian submanifold.
///
/// Tangent vectors are coordinates in an orthonormal basis `tau` of `T_0 L`,
/// normal vectors in an orthonormal basis `nu` of `N_0 L`. `frame` is the
/// matrix of `i_0 : N_0 L -> T_0 L` in these bases; `i_0 : T_0 L -> N_0 L`
/// is then `-frame^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryData {
    dim: usize,
    lambda: f64,
    mu: f64,
    c: f64,
    i0b0: Mat,
    ii_perp: Tensor3,
    f1: Tensor3,
    frame: Mat,
}

impl GeometryData {
    /// `ii_perp[i][j][k]` is the `k`-th tangent coordinate of
    /// `i_0 II_0(tau_i, tau_j)`; `f1[i][j][k]` that of
    /// `i_0 F_1(i_0 tau_i, i_0 tau_j)`; `i0b0` acts on tangent coordinates.
    pub fn new(lambda: f64, mu: f64, i0b0: Mat, ii_perp: Tensor3, f1: Tensor3, frame: Mat) -> Result<Self> {
        let d = ii_perp.dim();
        if d == 0 {
            return Err(Error::param("dim", "must be positive"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("lambda", format!("(H1) needs lambda > 0, got {lambda}")));
        }
        if !(mu.is_finite() && mu >= 0.0 && mu < lambda) {
            return Err(Error::param(
                "mu",
                format!("(H2) needs 0 <= mu < lambda, got mu = {mu}, lambda = {lambda}"),
            ));
        }
        if f1.dim() != d {
            return Err(Error::DimMismatch { expected: d, got: f1.dim() });
        }
        check_square("i0b0", &i0b0, d)?;
        check_square("frame", &frame, d)?;
        if !ii_perp.is_finite() || !f1.is_finite() {
            return Err(Error::param("geometry", "non-finite tensor entry"));
        }

        let jtj = mat_mul(&transpose(&frame), &frame);
        if max_dev(&jtj, &identity(d)) > TOL {
            return Err(Error::param("frame", "i_0 must be orthogonal"));
        }
        let kt = transpose(&i0b0);
        let skew = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .fold(0.0f64, |m, (i, j)| m.max((i0b0[i][j] + kt[i][j]).abs()));
        if skew > TOL * (1.0 + mu) {
            return Err(Error::param("i0b0", "i_0 B_0 must be skew-symmetric"));
        }
        let k2 = mat_mul(&i0b0, &i0b0);
        let minus_mu: Mat = identity(d)
            .into_iter()
            .map(|r| r.into_iter().map(|v| -mu * v).collect())
            .collect();
        if max_dev(&k2, &minus_mu) > TOL * (1.0 + mu) {
            return Err(Error::param("i0b0", "(H2) needs (i_0 B_0)^2 = -mu I"));
        }
        let scale = ii_perp.max_abs().max(1.0);
        if ii_perp.symmetry_defect() > TOL * scale {
            return Err(Error::param(
                "ii_perp",
                "i_0 II(X, Y) . Z must be symmetric in (X, Y, Z)",
            ));
        }
        let fscale = f1.max_abs().max(1.0);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if (f1.get(i, j, k) - f1.get(j, i, k)).abs() > TOL * fscale {
                        return Err(Error::param("f1", "F_1 must be symmetric in its two arguments"));
                    }
                }
            }
        }
        Ok(Self {
            dim: d,
            lambda,
            mu,
            c: (lambda - mu).sqrt(),
            i0b0,
            ii_perp,
            f1,
            frame,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Sound speed `sqrt(lambda - mu)`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn i0b0(&self) -> &Mat {
        &self.i0b0
    }

    pub fn ii_perp(&self) -> &Tensor3 {
        &self.ii_perp
    }

    pub fn f1(&self) -> &Tensor3 {
        &self.f1
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    /// `3/2 - 2 mu/lambda - (2c/lambda) i_0 B_0`.
    pub fn prefactor(&self) -> Mat {
        let d = self.dim;
        let a = 1.5 - 2.0 * self.mu / self.lambda;
        let b = 2.0 * self.c / self.lambda;
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|l| if k == l { a } else { 0.0 } - b * self.i0b0[k][l])
                    .collect()
            })
            .collect()
    }

    /// `R` with `R(A_x, A) = M i_0 II(A_x, A) - i_0 F_1(i_0 A_x, i_0 A)/(2 lambda)`.
    pub fn raw_tensor(&self) -> Tensor3 {
        let d = self.dim;
        let m = self.prefactor();
        Tensor3::from_fn(d, |i, j, k| {
            let ii: f64 = (0..d).map(|l| m[k][l] * self.ii_perp.get(i, j, l)).sum();
            ii - self.f1.get(i, j, k) / (2.0 * self.lambda)
        })
    }

    /// `(c + s i_0 B_0) x` for `s = +1` or `-1`.
    pub fn c_plus_b(&self, s: f64, x: &[f64]) -> Vec<f64> {
        let kx = mat_vec(&self.i0b0, x);
        x.iter().zip(kx).map(|(a, b)| self.c * a + s * b).collect()
    }

    /// `i_0 n` in tangent coordinates.
    pub fn i0_normal(&self, n: &[f64]) -> Vec<f64> {
        mat_vec(&self.frame, n)
    }

    /// `i_0^{-1} x = frame^T x` in normal coordinates.
    pub fn i0_inv(&self, x: &[f64]) -> Vec<f64> {
        mat_t_vec(&self.frame, x)
    }

    /// `II_0(x, y)` as a normal vector.
    pub fn ii_normal(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.i0_inv(&self.ii_perp.apply(x, y))
    }

    /// `II^T(x, n)`, the tangent second fundamental form of the normal
    /// bundle, fixed by `Y . II^T(X, N) = -II(X, Y) . N`.
    pub fn ii_top(&self, x: &[f64], n: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|l| {
                let mut e = vec![0.0; d];
                e[l] = 1.0;
                -self
                    .ii_normal(x, &e)
                    .iter()
                    .zip(n)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// `F_1(n1, n2)` in normal coordinates.
    pub fn f1_normal(&self, n1: &[f64], n2: &[f64]) -> Vec<f64> {
        self.i0_inv(&self.f1.apply(&self.i0_normal(n1), &self.i0_normal(n2)))
    }

    /// `i_0 B_0` restricted to the normal space, in normal coordinates.
    pub fn b_normal(&self, n: &[f64]) -> Vec<f64> {
        let x = mat_vec(&self.i0b0, &self.i0_normal(n));
        self.i0_inv(&x).into_iter().map(|v| -v).collect()
    }
}

fn transpose(m: &Mat) -> Mat {
    let d = m.len();
    (0..d).map(|i| (0..d).map(|j| m[j][i]).collect()).collect()
}

fn max_dev(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(d: usize, lambda: f64) -> Result<GeometryData> {
        GeometryData::new(lambda, 0.0, vec![vec![0.0; d]; d], Tensor3::zeros(d), Tensor3::zeros(d), identity(d))
    }

    #[test]
    fn rejects_h1_h2_violations() {
        assert!(flat(1, 0.0).is_err());
        assert!(flat(1, -1.0).is_err());
        let k = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let g = |mu: f64| {
            GeometryData::new(1.0, mu, k.clone(), Tensor3::zeros(2), Tensor3::zeros(2), identity(2))
        };
        // mu must satisfy K^2 = -mu I and mu < lambda.
        assert!(matches!(g(1.0), Err(Error::InvalidParameter { name: "mu", .. })));
        assert!(GeometryData::new(2.0, 1.0, k, Tensor3::zeros(2), Tensor3::zeros(2), identity(2)).is_ok());
    }

    #[test]
    fn rejects_asymmetric_inputs() {
        let mut ii = Tensor3::zeros(2);
        ii.set(0, 0, 1, 1.0);
        let r = GeometryData::new(1.0, 0.0, vec![vec![0.0; 2]; 2], ii, Tensor3::zeros(2), identity(2));
        assert!(r.is_err());
        let mut f = Tensor3::zeros(2);
        f.set(0, 1, 0, 1.0);
        let r = GeometryData::new(1.0, 0.0, vec![vec![0.0; 2]; 2], Tensor3::zeros(2), f, identity(2));
        assert!(r.is_err());
        let r = GeometryData::new(
            1.0,
            0.0,
            vec![vec![0.0; 2]; 2],
            Tensor3::zeros(2),
            Tensor3::zeros(2),
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn c_plus_b_has_norm_sqrt_lambda() {
        // |(c + K) x|^2 = lambda |x|^2 whenever K is skew with K^2 = -mu.
        let k = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let g = GeometryData::new(2.0, 1.0, k, Tensor3::zeros(2), Tensor3::zeros(2), identity(2)).unwrap();
        let x = [0.3, -1.7];
        let y = g.c_plus_b(1.0, &x);
        let n2: f64 = y.iter().map(|v| v * v).sum();
        assert!((n2 - 2.0 * (0.09 + 2.89)).abs() < 1e-12);
        let back = g.c_plus_b(-1.0, &y);
        assert!((back[0] / 2.0 - x[0]).abs() < 1e-14 && (back[1] / 2.0 - x[1]).abs() < 1e-14);
    }

    #[test]
    fn ii_top_is_adjoint_of_ii() {
        let ii = Tensor3::from_fn(2, |i, j, k| [0.4, -0.3, 1.2, 0.5][i + j + k]);
        let frame = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let g = GeometryData::new(1.5, 0.0, vec![vec![0.0; 2]; 2], ii, Tensor3::zeros(2), frame).unwrap();
        let (x, y, n) = ([0.2, 0.9], [-1.1, 0.4], [0.7, 0.3]);
        let lhs: f64 = y.iter().zip(g.ii_top(&x, &n)).map(|(a, b)| a * b).sum();
        let rhs: f64 = -g.ii_normal(&x, &y).iter().zip(&n).map(|(a, b)| a * b).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
