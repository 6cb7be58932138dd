use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{RealField, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftedError {
    /// Translation `s` applied to `b` (`b(x - s)`) that best matches `a`.
    pub shift: f64,
    /// `|b(. - s) - a|_{L2} / |a|_{L2}`.
    pub relative: f64,
}

/// Relative L2 distance between `a` and the best translate of `b`.
///
/// The translation is located on the grid by FFT cross-correlation and then
/// refined by Newton steps on the band-limited correlation.
pub fn shift_minimized_error(a: &RealField, b: &RealField) -> Result<ShiftedError> {
    a.same_shape(b)?;
    let grid = *a.grid();
    let sp = Spectral::new(grid);
    let n = grid.n_points();
    let k = sp.wavenumbers().to_vec();
    // C(s) = sum_k conj(a_k) b_k e^{-iks}, the correlation <a, b(. - s)>.
    let mut prod = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..a.dim() {
        let ah = sp.to_spectrum(a.component(c));
        let bh = sp.to_spectrum(b.component(c));
        for j in 0..n {
            prod[j] += ah[j].conj() * bh[j];
        }
    }
    let corr = |s: f64, order: i32| -> f64 {
        prod.iter()
            .zip(&k)
            .map(|(p, kk)| (p * (-Complex64::i() * kk).powi(order) * (-Complex64::i() * kk * s).exp()).re)
            .sum()
    };
    let h = grid.spacing();
    let best = (0..n)
        .map(|j| j as f64 * h)
        .map(|s| (s, corr(s, 0)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(s, _)| s)
        .ok_or(Error::GridMismatch)?;
    let mut s = best;
    for _ in 0..20 {
        let d2 = corr(s, 2);
        if d2 >= 0.0 {
            break;
        }
        let step = -corr(s, 1) / d2;
        s += step.clamp(-h, h);
        if step.abs() < 1e-14 * grid.length() {
            break;
        }
    }
    let moved: Vec<Vec<f64>> = b.components().iter().map(|c| sp.translate(c, s)).collect();
    let moved = RealField::new(grid, moved)?;
    let norm = a.l2_norm();
    let diff = moved.sub(a).l2_norm();
    Ok(ShiftedError {
        shift: s,
        relative: if norm > 0.0 { diff / norm } else { diff },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn recovers_off_grid_translation() {
        let grid = Grid::new(256, 40.0).unwrap();
        let f = |x: f64| (-(x - 20.0).powi(2) / 4.0).exp();
        let a = RealField::from_fn(grid, 1, |_, x| f(x));
        let b = RealField::from_fn(grid, 1, |_, x| f(x + 3.3));
        let r = shift_minimized_error(&a, &b).unwrap();
        assert!((r.shift - 3.3).abs() < 1e-9, "{}", r.shift);
        assert!(r.relative < 1e-10, "{}", r.relative);
    }

    #[test]
    fn shape_change_is_measured() {
        let grid = Grid::new(128, 40.0).unwrap();
        let a = RealField::from_fn(grid, 1, |_, x| (-(x - 20.0).powi(2) / 4.0).exp());
        let b = a.scaled(1.1);
        let r = shift_minimized_error(&a, &b).unwrap();
        assert!((r.relative - 0.1).abs() < 1e-9);
    }
}
