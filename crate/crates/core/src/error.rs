use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("mode {mode} out of range for a {ndim}-way tensor")]
    InvalidMode { mode: usize, ndim: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A Lipschitz estimate was requested where the smallest singular value
    /// of the stacked feature matrix vanishes.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("regularizer kind `{0}` is not handled by this routine")]
    InvalidKind(&'static str),

    #[error("not a descent direction (initial slope {0:e} >= 0)")]
    NotDescent(f64),

    #[error("line search failed at iteration {iteration}: {reason}")]
    LineSearch { iteration: usize, reason: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
