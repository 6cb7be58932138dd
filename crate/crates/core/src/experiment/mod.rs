//! TOML-configured experiments and their CSV/JSON artifacts.

mod config;
mod output;
mod run;

pub use config::{
    ExperimentConfig, ExperimentKind, GridConfig, HyperbolicConfig, InitialData, MiuraConfig, ProfileChoice,
    SolitonConfig, TimeConfig,
};
pub use output::{emit_series, Assertion, Series, Summary};
pub use run::{
    characteristic_breakdown_time, run_experiment, ExperimentOutput, RunOptions, KDV_DT, MIURA_DT, RESIDUAL_STEPS,
};
