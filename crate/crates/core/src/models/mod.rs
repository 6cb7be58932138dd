//! Geometry of the concrete examples and their raw limit equations.

mod geometry;
mod preset;

pub use geometry::{GeometryData, Mat};
pub use preset::{coupled_gp_limit, easy_cone_b, limit_equation, preset, MicroModelSpec};
