//! Tools for the vector KdV flow: fixed points of `Q`, solitary waves, the
//! Miura transform and the `d = 2` complex family.

mod fixed_point;
mod miura;
mod shift;
mod soliton;

pub use fixed_point::{find_fixed_point, newton_fixed_point, FixedPoints, DEDUP_TOL, ROOT_TOL};
pub use miura::{complex_q_d2, miura_condition, miura_crosscheck, miura_map, MiuraReport, MIURA_TOL};
pub use shift::{shift_minimized_error, ShiftedError};
pub use soliton::{build_soliton, soliton_ode_residual, SechProfile, SolitonSpec, DIRECTION_TOL, TAIL_TOL};
