use std::fmt::Debug;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Scalar sample type carried by a [`Field`]: `f64` or `Complex64`.
pub trait Sample: Copy + Debug + Send + Sync + PartialEq + 'static {
    const IS_REAL: bool;
    fn to_complex(self) -> Complex64;
    /// Projects back onto the sample type (real part for `f64`).
    fn from_complex(z: Complex64) -> Self;
    fn from_real(x: f64) -> Self;
    fn is_finite(self) -> bool;
    fn norm_sqr(self) -> f64;
    fn scale(self, a: f64) -> Self;
    fn add(self, other: Self) -> Self;
    fn zero() -> Self;
}

impl Sample for f64 {
    const IS_REAL: bool = true;
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, a: f64) -> Self {
        self * a
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn zero() -> Self {
        0.0
    }
}

impl Sample for Complex64 {
    const IS_REAL: bool = false;
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, a: f64) -> Self {
        self * a
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// A `d`-component function sampled on a periodic [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T: Sample> {
    grid: Grid,
    comps: Vec<Vec<T>>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid, comps: Vec<Vec<T>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::param("components", "field needs at least one component"));
        }
        for c in &comps {
            if c.len() != grid.n_points() {
                return Err(Error::DimMismatch {
                    expected: grid.n_points(),
                    got: c.len(),
                });
            }
        }
        let f = Self { grid, comps };
        f.check_finite("field")?;
        Ok(f)
    }

    /// Builds a field without the finiteness scan; lengths are still asserted.
    pub(crate) fn from_parts(grid: Grid, comps: Vec<Vec<T>>) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.n_points()));
        Self { grid, comps }
    }

    pub fn scalar(grid: Grid, values: Vec<T>) -> Result<Self> {
        Self::new(grid, vec![values])
    }

    pub fn zeros(grid: Grid, dim: usize) -> Self {
        Self {
            grid,
            comps: vec![vec![T::zero(); grid.n_points()]; dim.max(1)],
        }
    }

    /// Samples `f(component, x)` on the grid.
    pub fn from_fn(grid: Grid, dim: usize, f: impl Fn(usize, f64) -> T) -> Self {
        let comps = (0..dim)
            .map(|c| grid.points().into_iter().map(|x| f(c, x)).collect())
            .collect();
        Self { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn len(&self) -> usize {
        self.grid.n_points()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn component(&self, i: usize) -> &[T] {
        &self.comps[i]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.comps[i]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<T>> {
        self.comps
    }

    /// Pointwise value of component `c` at sample `j`.
    pub fn at(&self, c: usize, j: usize) -> T {
        self.comps[c][j]
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        for (ci, c) in self.comps.iter().enumerate() {
            if let Some(j) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what,
                    component: ci,
                    index: j,
                });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (v, &w) in c.iter_mut().zip(o) {
                *v = v.add(w.scale(a));
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| v.scale(a))
    }

    /// `self - other`, assuming equal shapes.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Pointwise Euclidean norm squared summed over components.
    pub fn pointwise_norm_sqr(&self, j: usize) -> f64 {
        self.comps.iter().map(|c| c[j].norm_sqr()).sum()
    }

    /// Trapezoid L² norm over all components.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        (s * self.grid.spacing()).sqrt()
    }

    /// Maximum over samples of the pointwise Euclidean norm.
    pub fn linf_norm(&self) -> f64 {
        (0..self.len())
            .map(|j| self.pointwise_norm_sqr(j).sqrt())
            .fold(0.0, f64::max)
    }

    /// Max |a - b| over all samples.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(&a, &b)| (a.to_complex() - b.to_complex()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_complex(&self) -> ComplexField {
        Field {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|v| v.to_complex()).collect())
                .collect(),
        }
    }
}

impl RealField {
    /// Componentwise trapezoid integral.
    pub fn integral(&self) -> Vec<f64> {
        self.comps.iter().map(|c| self.grid.integrate(c)).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        self.integral()
            .into_iter()
            .map(|v| v / self.grid.length())
            .collect()
    }

    /// Pointwise vector at sample `j`.
    pub fn vector_at(&self, j: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[j]).collect()
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        Field {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|v| v.re).collect())
                .collect(),
        }
    }

    pub fn max_imag(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.im.abs())
            .fold(0.0, f64::max)
    }
}
