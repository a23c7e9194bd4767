use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("series has nonzero empty-word coefficient {0}; exp requires 0")]
    NonzeroConstantTerm(f64),

    #[error("series has empty-word coefficient {0}; log requires 1")]
    ConstantTermNotOne(f64),

    #[error("degenerate normalization: diagonal cumulant for coordinate {coord} is {value} (<= {eps})")]
    DegenerateNormalization { coord: usize, value: f64, eps: f64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("path needs at least 2 time points, got {0}")]
    PathTooShort(usize),

    #[error("paths do not share a common grid/dimension")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("map undefined at path {path}, time index {time_index}")]
    DomainViolation { path: usize, time_index: usize },

    #[error("Jacobian is singular at grid point {point}")]
    SingularJacobian { point: usize },

    #[error("covariance matrix is not positive definite (after jitter retry)")]
    NotPositiveDefinite,

    #[error("operation not supported: {0}")]
    NotSupported(String),

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("optimizer diverged: objective value {0}")]
    Diverged(f64),
}

impl Error {
    pub fn invalid(name: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
