//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by ktok operations.
#[derive(Error, Debug)]
pub enum KtokError {
    /// A line in an input file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An operation that requires data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Invalid configuration or precondition violation detected at runtime.
    #[error("configuration error: {0}")]
    Config(String),

    /// Greedy decoding found no candidate at a position.
    #[error("no candidate matches in {word:?} at character {position}")]
    Decode { word: String, position: usize },

    /// A file does not conform to its expected format.
    #[error("{path}:{line}: format error: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Cross-referenced data is inconsistent (e.g. a missing embedding row).
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl KtokError {
    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        KtokError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        KtokError::Format {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        KtokError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, KtokError>;
