use num_complex::Complex64;

use super::fft::FftPair;
use super::field::{Field, RealField, Sample};
use super::grid::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Zero-padding factor for dealiased products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// `3N/2` points: exact for quadratic products of resolved modes.
    Quadratic,
    /// `2N` points: exact for cubic products.
    Cubic,
}

/// Fourier machinery bound to one grid. Plans are owned, so each worker
/// thread should hold its own instance.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    fft: FftPair,
    quad: FftPair,
    cubic: FftPair,
    k: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            fft: FftPair::new(n),
            quad: FftPair::new(padded_len(n, Padding::Quadratic)),
            cubic: FftPair::new(padded_len(n, Padding::Cubic)),
            k: grid.wavenumbers(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn to_spectrum<T: Sample>(&self, values: &[T]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|v| v.to_complex()).collect();
        self.fft.forward_in_place(&mut buf);
        buf
    }

    pub fn from_spectrum<T: Sample>(&self, spectrum: &[Complex64]) -> Vec<T> {
        let mut buf = spectrum.to_vec();
        self.fft.inverse_in_place(&mut buf);
        buf.into_iter().map(T::from_complex).collect()
    }

    /// Per-slot multiplier for a symbol `m(k)`. The Nyquist slot receives the
    /// average `(m(K) + m(-K))/2`, which zeroes odd derivatives there and keeps
    /// real fields real.
    pub fn multiplier(&self, m: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let nyq = self.grid.nyquist_slot();
        self.k
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if j == nyq {
                    0.5 * (m(k) + m(-k))
                } else {
                    m(k)
                }
            })
            .collect()
    }

    pub fn apply_multiplier<T: Sample>(&self, f: &Field<T>, mult: &[Complex64]) -> Field<T> {
        let comps = f
            .components()
            .iter()
            .map(|c| self.apply_multiplier_values(c, mult))
            .collect();
        Field::from_parts(*f.grid(), comps)
    }

    pub fn apply_multiplier_values<T: Sample>(&self, values: &[T], mult: &[Complex64]) -> Vec<T> {
        let mut s = self.to_spectrum(values);
        for (v, m) in s.iter_mut().zip(mult) {
            *v *= m;
        }
        self.from_spectrum(&s)
    }

    pub fn derivative_multiplier(&self, order: u32) -> Vec<Complex64> {
        self.multiplier(|k| (I * k).powu(order))
    }

    pub fn derivative<T: Sample>(&self, f: &Field<T>, order: u32) -> Field<T> {
        if order == 0 {
            return f.clone();
        }
        self.apply_multiplier(f, &self.derivative_multiplier(order))
    }

    pub fn derivative_values<T: Sample>(&self, values: &[T], order: u32) -> Vec<T> {
        if order == 0 {
            return values.to_vec();
        }
        self.apply_multiplier_values(values, &self.derivative_multiplier(order))
    }

    /// Zero-mean antiderivative of zero-mean periodic data.
    pub fn antiderivative(&self, values: &[f64]) -> Vec<f64> {
        let mult = self.multiplier(|k| if k == 0.0 { Complex64::new(0.0, 0.0) } else { 1.0 / (I * k) });
        self.apply_multiplier_values(values, &mult)
    }

    /// Band-limited translation: returns samples of `f(x - s)`.
    pub fn translate<T: Sample>(&self, values: &[T], s: f64) -> Vec<T> {
        let mult = self.multiplier(|k| (-I * k * s).exp());
        self.apply_multiplier_values(values, &mult)
    }

    fn pad_pair(&self, p: Padding) -> &FftPair {
        match p {
            Padding::Quadratic => &self.quad,
            Padding::Cubic => &self.cubic,
        }
    }

    pub fn padded_len(&self, p: Padding) -> usize {
        self.pad_pair(p).len()
    }

    /// Physical samples on the padded grid of the field with N-point spectrum
    /// `spectrum` (Nyquist mode dropped).
    pub fn pad(&self, spectrum: &[Complex64], p: Padding) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let pair = self.pad_pair(p);
        let m = pair.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let half = n / 2;
        buf[..half].copy_from_slice(&spectrum[..half]);
        for j in half + 1..n {
            buf[m - (n - j)] = spectrum[j];
        }
        pair.inverse_in_place(&mut buf);
        let s = m as f64 / n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
        buf
    }

    pub fn pad_real(&self, spectrum: &[Complex64], p: Padding) -> Vec<f64> {
        self.pad(spectrum, p).into_iter().map(|z| z.re).collect()
    }

    /// Inverse of [`Spectral::pad`]: N-point spectrum of padded samples,
    /// truncated to the resolved modes with the Nyquist slot zeroed.
    pub fn unpad<T: Sample>(&self, values: &[T], p: Padding) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let pair = self.pad_pair(p);
        let m = pair.len();
        let mut buf: Vec<Complex64> = values.iter().map(|v| v.to_complex()).collect();
        pair.forward_in_place(&mut buf);
        let s = n as f64 / m as f64;
        let half = n / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..half {
            out[j] = buf[j] * s;
        }
        for j in half + 1..n {
            out[j] = buf[m - (n - j)] * s;
        }
        out
    }

    /// Zeroes the Nyquist slot of a spectrum.
    pub fn drop_nyquist(&self, spectrum: &mut [Complex64]) {
        spectrum[self.grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
    }
}

pub fn padded_len(n: usize, p: Padding) -> usize {
    match p {
        Padding::Quadratic => {
            let m = (3 * n).div_ceil(2);
            m + (m % 2)
        }
        Padding::Cubic => 2 * n,
    }
}

pub const MAX_DERIVATIVE_ORDER: u32 = 4;

/// Fourier-collocation derivative of every component.
pub fn spectral_derivative<T: Sample>(f: &Field<T>, order: u32) -> Result<Field<T>> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::param(
            "order",
            format!("derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"),
        ));
    }
    f.check_finite("spectral_derivative input")?;
    Ok(Spectral::new(*f.grid()).derivative(f, order))
}

/// `(‖f‖, ‖∂f‖, …, ‖∂^s f‖)` in L², computed through Parseval.
pub fn hs_seminorms<T: Sample>(f: &Field<T>, s: u32) -> Result<Vec<f64>> {
    if s > MAX_DERIVATIVE_ORDER {
        return Err(Error::param("s", format!("order {s} exceeds {MAX_DERIVATIVE_ORDER}")));
    }
    f.check_finite("hs_seminorms input")?;
    let sp = Spectral::new(*f.grid());
    let n = f.len() as f64;
    let scale = f.grid().length() / (n * n);
    let spectra: Vec<Vec<Complex64>> = f.components().iter().map(|c| sp.to_spectrum(c)).collect();
    Ok((0..=s)
        .map(|order| {
            let mult = sp.derivative_multiplier(order);
            let sum: f64 = spectra
                .iter()
                .flat_map(|spec| spec.iter().zip(&mult))
                .map(|(v, m)| (v * m).norm_sqr())
                .sum();
            (sum * scale).sqrt()
        })
        .collect())
}

/// Exact propagator of `∂t f = L f` for a Fourier-diagonal `L` with symbol
/// `symbol(k)`.
pub fn advance_linear<T: Sample>(
    f: &Field<T>,
    symbol: impl Fn(f64) -> Complex64,
    dt: f64,
) -> Result<Field<T>> {
    f.check_finite("advance_linear input")?;
    let sp = Spectral::new(*f.grid());
    let prop = LinearPropagator::new(&sp, &symbol, dt)?;
    Ok(sp.apply_multiplier(f, prop.multipliers()))
}

/// Precomputed `exp(symbol(k) dt)` per FFT slot.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    mult: Vec<Complex64>,
}

/// Largest admissible growth exponent before `exp` is treated as overflow.
const MAX_EXPONENT: f64 = 700.0;

impl LinearPropagator {
    pub fn new(sp: &Spectral, symbol: &dyn Fn(f64) -> Complex64, dt: f64) -> Result<Self> {
        let mut worst: f64 = f64::NEG_INFINITY;
        for &k in sp.wavenumbers() {
            let z = symbol(k) * dt;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::param("symbol", format!("non-finite symbol at k = {k}")));
            }
            worst = worst.max(z.re).max((symbol(-k) * dt).re);
        }
        if worst > MAX_EXPONENT {
            return Err(Error::Overflow { exponent: worst });
        }
        Ok(Self {
            mult: sp.multiplier(|k| (symbol(k) * dt).exp()),
        })
    }

    pub fn identity(sp: &Spectral) -> Self {
        Self {
            mult: vec![Complex64::new(1.0, 0.0); sp.grid().n_points()],
        }
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.mult
    }
}

/// Convenience: real field from a closure, used widely in tests and setup.
pub fn sample_real(grid: Grid, f: impl Fn(f64) -> f64) -> RealField {
    RealField::from_fn(grid, 1, |_, x| f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ComplexField;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn third_derivative_of_sine() {
        let f = sample_real(grid(32), f64::sin);
        let d3 = spectral_derivative(&f, 3).unwrap();
        let want = sample_real(grid(32), |x| -x.cos());
        assert!(d3.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = sample_real(grid(16), |_| 3.7);
        for order in 1..=4 {
            assert!(spectral_derivative(&f, order).unwrap().linf_norm() < 1e-13);
        }
    }

    #[test]
    fn complex_exponential_derivative() {
        let g = grid(64);
        let f = ComplexField::from_fn(g, 1, |_, x| (I * 2.0 * x).exp());
        let d = spectral_derivative(&f, 1).unwrap();
        let want = ComplexField::from_fn(g, 1, |_, x| 2.0 * I * (I * 2.0 * x).exp());
        assert!(d.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn derivative_rejects_bad_input() {
        let mut v = vec![0.0; 16];
        v[2] = f64::INFINITY;
        let f = RealField::from_parts(grid(16), vec![v]);
        assert!(spectral_derivative(&f, 1).is_err());
        let ok = sample_real(grid(16), f64::sin);
        assert!(spectral_derivative(&ok, 5).is_err());
    }

    #[test]
    fn seminorms_of_sines() {
        let z = sample_real(grid(32), |_| 0.0);
        assert!(hs_seminorms(&z, 3).unwrap().iter().all(|&v| v == 0.0));
        let f = sample_real(grid(32), f64::sin);
        let s = hs_seminorms(&f, 1).unwrap();
        assert!((s[0] - PI.sqrt()).abs() < 1e-12 && (s[1] - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seminorms_match_quadrature_oracle() {
        // Oracle: trapezoid sums of the analytic derivatives of sin(2x).
        let g = grid(64);
        let f = sample_real(g, |x| (2.0 * x).sin());
        let quad = |h: &dyn Fn(f64) -> f64| {
            (g.integrate(&g.points().iter().map(|&x| h(x) * h(x)).collect::<Vec<_>>())).sqrt()
        };
        let want = [
            quad(&|x: f64| (2.0 * x).sin()),
            quad(&|x: f64| 2.0 * (2.0 * x).cos()),
            quad(&|x: f64| -4.0 * (2.0 * x).sin()),
        ];
        let got = hs_seminorms(&f, 2).unwrap();
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!((got[1] - 2.0 * PI.sqrt()).abs() < 1e-12);
        assert!((got[2] - 4.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn airy_mode_is_exact() {
        let g = grid(32);
        let c = 1.3;
        let k = 3.0;
        let dt = 0.77;
        let f = ComplexField::from_fn(g, 1, |_, x| (I * k * x).exp());
        let out = advance_linear(&f, |kk| -I * kk.powi(3) / (8.0 * c), dt).unwrap();
        let phase = (-I * k.powi(3) * dt / (8.0 * c)).exp();
        let want = f.map(|v| v * phase);
        assert!(out.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn zero_symbol_is_identity_and_heat_kernel_decays() {
        let g = grid(32);
        let f = sample_real(g, f64::sin);
        let same = advance_linear(&f, |_| Complex64::new(0.0, 0.0), 1.0).unwrap();
        assert!(same.max_abs_diff(&f) < 1e-14);
        let heat = advance_linear(&f, |k| Complex64::new(-k * k, 0.0), 0.1).unwrap();
        let want = sample_real(g, |x| (-0.1f64).exp() * x.sin());
        assert!(heat.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn overflow_is_rejected() {
        let f = sample_real(grid(32), f64::sin);
        let r = advance_linear(&f, |k| Complex64::new(k.powi(4), 0.0), 10.0);
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }

    #[test]
    fn padded_product_is_exact_for_resolved_modes() {
        let g = grid(16);
        let sp = Spectral::new(g);
        let u = sample_real(g, |x| (7.0 * x).cos());
        let s = sp.to_spectrum(u.component(0));
        let pu = sp.pad_real(&s, Padding::Quadratic);
        let sq: Vec<f64> = pu.iter().map(|v| v * v).collect();
        let back: Vec<f64> = sp.from_spectrum(&sp.unpad(&sq, Padding::Quadratic));
        // cos² (7x) = 1/2 + cos(14x)/2; mode 14 is unresolved on 16 points and must not alias.
        for v in back {
            assert!((v - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_and_translate() {
        let g = grid(32);
        let sp = Spectral::new(g);
        let f = sample_real(g, f64::cos);
        let a = sp.antiderivative(f.component(0));
        for (x, v) in g.points().iter().zip(&a) {
            assert!((v - x.sin()).abs() < 1e-13);
        }
        let t = sp.translate(f.component(0), 0.3);
        for (x, v) in g.points().iter().zip(&t) {
            assert!((v - (x - 0.3).cos()).abs() < 1e-13);
        }
    }
}
