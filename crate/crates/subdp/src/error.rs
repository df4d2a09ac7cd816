//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by estimator construction, privatization, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested accuracy cannot be met at the given privacy budget:
    /// the calibrated noise would dominate the estimator's own error scale.
    /// Callers that want the noisy answer anyway can pass `force`.
    #[error("privacy/accuracy regime violation: {0}")]
    RegimeViolation(String),

    /// A query session has already answered its declared number of queries.
    /// The refusal depends only on the query counter, never on query content.
    #[error("query budget exhausted: {made} of {k_max} queries already answered")]
    QueryBudgetExhausted { made: u32, k_max: u32 },

    /// An estimator failed internally (for example a local-computation
    /// budget was exceeded). The message never includes input data.
    #[error("estimator failure: {0}")]
    Estimator(String),

    /// Malformed input file.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line interface: validation and
    /// parse problems map to 2, regime violations to 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RegimeViolation(_) => 3,
            _ => 2,
        }
    }
}
