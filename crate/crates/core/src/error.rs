use thiserror::Error;

/// Errors raised across the simulation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("singular point: {0}")]
    Singular(&'static str),

    #[error("norm drift {drift:e} exceeds budget {budget:e}")]
    NormDrift { drift: f64, budget: f64 },

    #[error("trace drift {drift:e} exceeds budget {budget:e}")]
    TraceDrift { drift: f64, budget: f64 },

    #[error("positivity violated: minimum eigenvalue {min_eig:e} (dt = {dt}); reduce the step size")]
    Positivity { min_eig: f64, dt: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size guard: superoperator dimension {dim} exceeds limit {limit}")]
    SizeGuard { dim: usize, limit: usize },

    #[error("{what} did not converge (residual {residual:e})")]
    NotConverged { what: &'static str, residual: f64 },

    #[error("ill-conditioned finite difference: eigenvalues moved by {change:e} on step halving")]
    IllConditioned { change: f64 },

    #[error("series too short: need {needed} samples, have {have}")]
    SeriesTooShort { needed: usize, have: usize },

    #[error("jump probability {prob} in one step exceeds {limit}; reduce dt")]
    StepTooCoarse { prob: f64, limit: f64 },

    #[error("grid mismatch between records: {0}")]
    GridMismatch(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
