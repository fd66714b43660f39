use std::path::PathBuf;

use crate::model::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{kind} index {index} out of range (have {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("operation requires a {expected} model")]
    ModeMismatch { expected: Mode },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("infeasible starting point: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("test set empty")]
    TestSetEmpty,

    #[error("no ratings")]
    NoRatings,

    #[error("{0}")]
    ModelFormat(String),

    #[error("{0}")]
    Bridge(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
