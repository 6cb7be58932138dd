//! Microscopic models in the KdV scaling: Gross-Pitaevskii (scalar and
//! coupled), Landau-Lifshitz ferromagnets and the antiferromagnetic chain.
//!
//! Every model is simulated in the frame moving at the sound speed, with
//! time stretched by `eps^-3` and space by `eps^-1`.

mod evolve;
mod init;
mod invariants;
mod rhs;
mod state;

pub use evolve::{default_micro_dt, evolve_micro, GpScheme, MicroRunOptions, MicroTrajectory};
pub use init::well_prepared_init;
pub use invariants::{micro_invariants, MicroInvariants};
pub use rhs::{micro_rhs, MicroSystem, GP_AMPLITUDE_WINDOW};
pub use state::{renormalize, unit_defect, MicroField, MicroState, UNIT_TOL};
pub(crate) use state::{cross, dot, set_spin, spin};
