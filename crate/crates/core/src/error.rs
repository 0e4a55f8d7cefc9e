use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("provider returned an empty response")]
    EmptyResponse,

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("corrupt corpus at {path}:{line}: {message}")]
    CorruptCorpus {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("bad cluster count K={k} for {m} points")]
    BadK { k: usize, m: usize },

    #[error("no events were extracted from any document")]
    NoEvents,

    #[error("mention {0:?} is not in the vocabulary")]
    UnknownMention(String),

    #[error("raw column {0:?} is not mapped to any canonical event")]
    UnmappedColumn(String),

    #[error("degenerate matrix: {0}")]
    DegenerateMatrix(String),

    #[error("bad variable indices: {0}")]
    BadVars(String),

    #[error("column {0} has zero variance")]
    ConstantColumn(usize),

    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Artifact {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
