//! Generalized Madelung coordinates `(phi, n)`, the limit observables
//! `W, U, A`, the almost-conserved functional and hydrodynamic diagnostics.

mod chart;
mod observables;
mod residual;

pub use chart::{dphi, dphi_field, dphi_inverse, extract_hydro, extract_hydro_after, reconstruct_micro, HydroState};
pub use observables::{almost_hamiltonian, energy_proxy, observables, HamiltonianValue, Observables};
pub use residual::{
    check_time_grids, extract_trajectory, hydro_residual, limit_error, HydroResidual, LimitError, ResidualOptions,
};
