use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Category of a news fetch failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchErrorKind {
    /// Credentials rejected by the remote service. Not retriable.
    Auth,
    /// Transport-level failure or a 5xx / rate-limit response. Retriable.
    Network,
    /// The remote answered with something we could not interpret.
    Protocol,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing field {field} at line {line}")]
    MissingField { field: String, line: usize },

    #[error("malformed record at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{kind:?} error while fetching news: {message}")]
    Fetch { kind: FetchErrorKind, message: String },

    #[error("embedding file: {message} (byte offset {offset})")]
    Embedding { offset: u64, message: String },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("term {0:?} does not occur in the corpus")]
    UnknownTerm(String),

    #[error("series too short: need at least {needed} points, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("series are not aligned on the same date axis: {0}")]
    Misaligned(String),

    #[error("change rate undefined: previous value is zero on {0}")]
    ZeroBase(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether retrying the same operation may succeed.
    pub fn is_retriable(&self) -> bool {
        matches!(
            self,
            Error::Fetch {
                kind: FetchErrorKind::Network,
                ..
            }
        )
    }
}
