use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("read error: {0}")]
    Read(#[from] io::Error),

    /// Malformed input. `line` is 1-based; 0 means the position is not line oriented.
    #[error("{what}: line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("token {token:?} is not in the vocabulary of model {model:?}")]
    UnknownToken { token: String, model: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target {target} is never reached by the {series} curve (range {min}..{max})")]
    UnreachableTarget {
        series: &'static str,
        target: f64,
        min: f64,
        max: f64,
    },

    #[error("expected-neighbor curve is not non-increasing at grid index {index}")]
    NonMonotone { index: usize },

    #[error("index contains no documents")]
    EmptyIndex,

    #[error("query has no terms left after preprocessing")]
    EmptyQuery,

    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),

    #[error("query term {0:?} has no entry in the translation table")]
    MissingTranslation(String),

    #[error("runs cover different topics: {0}")]
    TopicMismatch(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn parse(what: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
