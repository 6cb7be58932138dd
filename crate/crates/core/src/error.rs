use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {what} (component {component}, sample {index})")]
    NonFinite {
        what: &'static str,
        component: usize,
        index: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("exponential overflow in linear propagator (Re(symbol*dt) = {exponent:.3e})")]
    Overflow { exponent: f64 },

    #[error("time step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },

    #[error("chart breakdown at sample {index} (x = {x}): {reason}")]
    ChartBreakdown { index: usize, x: f64, reason: String },

    #[error("model has no canonical form: {0}")]
    NotCanonical(String),

    #[error("symmetric eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("Miura condition violated (max defect {violation:.3e} > {tolerance:.1e})")]
    MiuraCondition { violation: f64, tolerance: f64 },

    #[error("profile tails too large at the domain boundary ({tail:.3e})")]
    TailTruncation { tail: f64 },

    #[error("time grids do not match: {0}")]
    TimeGridMismatch(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
