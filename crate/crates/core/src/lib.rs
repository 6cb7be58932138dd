//! Long-wave limits of Schrodinger-map type models.
//!
//! The crate has two layers. The first is a periodic pseudo-spectral toolkit
//! ([`spectral`]) with the vector KdV solver built on it ([`kdv`]). The second
//! holds the microscopic models ([`models`], [`micro`]), their hydrodynamic
//! chart ([`hydro`]), and the diagnostics for the KdV flow ([`analysis`]).
//! [`experiment`] wires everything to TOML configs and CSV/JSON output.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod hydro;
pub mod kdv;
pub mod micro;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
