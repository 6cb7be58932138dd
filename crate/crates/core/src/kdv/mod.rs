//! Vector KdV equations `u_t = delta u_xxx - d_x Q(u, u)`: coefficient tensors,
//! the limit-model container with its raw/canonical rescaling, the
//! integrating-factor solver and conserved quantities.

mod evolve;
mod hyperbolic;
mod model;
mod tensor;

pub use evolve::{
    blowup_monitor, conserved_quantities, evolve_kdv, evolve_kdv_with, step_plan, BlowupReport,
    Breakdown, Conserved, KdvRunOptions, Trajectory, DEFAULT_BLOWUP_FACTOR,
};
pub use hyperbolic::{flux_jacobian, genuine_nonlinearity, EigenReport};
pub use model::{kdv_rhs, q_apply, Form, KdvOperator, LimitModel, RawForm, Rescaling};
pub use tensor::{QTensor, Tensor3, SYMMETRY_TOL};
