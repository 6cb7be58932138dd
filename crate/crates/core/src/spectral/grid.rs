use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    length: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS {
            return Err(Error::param(
                "n_points",
                format!("need at least {} points, got {n_points}", Self::MIN_POINTS),
            ));
        }
        if n_points % 2 != 0 {
            return Err(Error::param("n_points", "must be even"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::param("length", format!("must be positive, got {length}")));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed integer frequency of FFT slot `j`; the Nyquist slot maps to `+N/2`.
    pub fn mode_index(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n_points / 2
    }

    /// Angular wavenumber of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI / self.length * self.mode_index(j) as f64
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.wavenumber(j)).collect()
    }

    pub fn max_wavenumber(&self) -> f64 {
        PI / self.spacing()
    }

    /// Periodic trapezoid rule (plain sum times spacing).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(Grid::new(4, 1.0).is_err());
        assert!(Grid::new(9, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
    }

    #[test]
    fn wavenumbers_are_antisymmetric_except_nyquist() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        for j in 1..8 {
            assert_eq!(k[j], -k[16 - j]);
            assert_eq!(k[j], j as f64);
        }
        assert_eq!(k[8], 8.0);
    }
}
