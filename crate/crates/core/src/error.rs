use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("vertex index {index} out of range for graph with {n_vertices} vertices")]
    Index { index: usize, n_vertices: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("confusion matrix is singular (det = {det:e})")]
    Singular { det: f64 },

    #[error("noise fit degenerate: {0}")]
    Degenerate(String),

    #[error("noise fit diverged at iteration {iteration}: {quantity} = {value}")]
    Divergence {
        iteration: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{failed} of {trials} trials failed, above the 1% ceiling")]
    TooManyFailures { failed: usize, trials: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
