use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("lexicon error: {0}")]
    Lexicon(String),

    #[error("cannot compile rule for {key:?}: {reason}")]
    Compile { key: String, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot merge span {start}..{end}: {reason}")]
    Merge {
        start: usize,
        end: usize,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("unknown idiom {0:?}")]
    UnknownIdiom(String),

    #[error("store has no idiom keys")]
    NoIdioms,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
