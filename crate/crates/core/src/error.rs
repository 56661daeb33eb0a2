use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch at word {word}: expected {expected}, found {found}")]
    DimensionMismatch {
        word: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in vector for word {0}")]
    NonFinite(String),

    #[error("zero vector for word {0}")]
    ZeroVector(String),

    #[error("unknown word {0}")]
    UnknownWord(String),

    #[error("missing words: {}", .0.join(", "))]
    MissingWords(Vec<String>),

    #[error("word list {list}: {message}")]
    WordList { list: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "SMO did not converge after {iterations} iterations (max KKT violation {violation:.3e})"
    )]
    NotConverged { iterations: usize, violation: f64 },

    #[error("report: {0}")]
    Report(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}
