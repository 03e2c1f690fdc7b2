use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("noise coefficients are not radially symmetric: {0}")]
    NonSymmetric(String),
    #[error("noise support exceeds the lattice: {0}")]
    SupportExceedsLattice(String),
    #[error("noise coefficients have empty support")]
    EmptySupport,
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("negative second moment {value:e} at step {step} (tolerance {tolerance:e})")]
    Negative { step: usize, value: f64, tolerance: f64 },
    #[error("hypothesis violated for {bound}: {detail}")]
    Hypothesis { bound: &'static str, detail: String },
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("nonpositive value {value:e} at t = {t}")]
    NonPositive { t: f64, value: f64 },
    #[error("time step {dt:e} exceeds the stability budget {budget:e}")]
    Unstable { dt: f64, budget: f64 },
    #[error("spectrum support violates the boundary margin: {0}")]
    SupportMargin(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
