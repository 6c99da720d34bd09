use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum FlrError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("numeric failure in {operand}: {reason}")]
    NumericFailure {
        operand: &'static str,
        reason: String,
    },

    #[error("solver diverged at iteration {iteration}: {block} became non-finite")]
    Divergence {
        iteration: usize,
        block: &'static str,
    },

    #[error("{path}: parse error at row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FlrError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FlrError::Validation(msg.into()))
}
