use thiserror::Error;

use crate::blup::Feasibility;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported distribution family `{0}` (expected `normal` or `exponential`)")]
    UnsupportedFamily(String),

    #[error("sample size n = {n} exceeds the supported maximum of {max}")]
    SampleSizeTooLarge { n: usize, max: usize },

    #[error("sample size must be at least 1")]
    EmptySampleSize,

    #[error(
        "quadrature did not converge: identity residual {achieved:.3e} exceeds {tolerance:.1e}"
    )]
    QuadratureNonConvergence { achieved: f64, tolerance: f64 },

    #[error("moment table failed validation: {0}")]
    InvariantViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("covariance block is numerically singular (condition {condition:.3e} > {limit:.1e})")]
    Singular { condition: f64, limit: f64 },

    #[error("target index {index} outside ({r}, {n}]")]
    TargetOutOfRange { index: usize, r: usize, n: usize },

    #[error("targets must satisfy s < t, got s = {s}, t = {t}")]
    TargetOrder { s: usize, t: usize },

    #[error("degenerate targets s = {s}, t = {t}: |alpha_t - alpha_s| = {gap:.3e}")]
    DegenerateTargets { s: usize, t: usize, gap: f64 },

    #[error("joint prediction is not available: {0}")]
    Infeasible(Feasibility),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid covariance for efficiency ratio: {0}")]
    InvalidCovariance(String),

    #[error("failed to parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Context { source, .. } => source.kind(),
            Error::QuadratureNonConvergence { .. }
            | Error::InvariantViolation(_)
            | Error::NotPositiveDefinite { .. }
            | Error::Singular { .. }
            | Error::DegenerateTargets { .. }
            | Error::InvalidCovariance(_) => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Validation,
        }
    }
}
