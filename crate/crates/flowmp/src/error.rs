//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("label `{0}` has no points")]
    EmptyLabel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point cloud must contain at least one point")]
    EmptyCloud,

    #[error("weight {value} at index {index} is not a finite positive number")]
    InvalidWeight { index: usize, value: f64 },

    #[error("{context} has {got} entries, expected {expected}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("smoothing parameter must be positive, got {0}")]
    InvalidSigma(f64),

    #[error("operator mixing weight lambda must lie in (0, 1), got {0}")]
    InvalidLambda(f64),

    #[error("prediction gap is zero; optimal guidance scale is undefined")]
    ZeroGap,

    #[error("zero baseline gap; relative change is undefined")]
    ZeroBaselineGap,

    #[error("fixed-point iterate diverged at iteration {step}")]
    Diverged { step: usize },

    #[error("trajectory records carry no projection traces")]
    MissingTrace,

    #[error("no samples provided")]
    EmptySamples,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
