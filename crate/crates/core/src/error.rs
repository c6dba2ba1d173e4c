use thiserror::Error;

/// Errors raised by the modeling and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular detuning: {0}")]
    SingularDetuning(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("non-uniform sampling: {0}")]
    NonUniformSampling(String),

    #[error("fit did not converge after {iterations} iterations: {reason}")]
    NonConvergence { iterations: usize, reason: String },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("incomplete input: {0}")]
    Incomplete(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("validation failed at {location}: {reason}")]
    Validation { location: String, reason: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.into(),
        reason: reason.into(),
    }
}
