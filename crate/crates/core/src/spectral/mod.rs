//! Periodic grids, sampled fields, Fourier operators and time steppers.

mod fft;
mod field;
mod grid;
mod integrate;
mod ops;

pub use fft::FftPair;
pub use field::{ComplexField, Field, RealField, Sample};
pub use grid::Grid;
pub use integrate::{ifrk4_step, rk4_step, IfRk4};
pub use ops::{
    advance_linear, hs_seminorms, padded_len, sample_real, spectral_derivative, LinearPropagator,
    Padding, Spectral, MAX_DERIVATIVE_ORDER,
};
