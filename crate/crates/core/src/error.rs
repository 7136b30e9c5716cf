use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid time {0:?}: expected non-negative seconds with at most 6 decimals")]
pub struct ParseTimeError(pub String);

/// A malformed input file. `row` is the 1-based line number, header included.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("row {row}: {message}")]
pub struct ParseError {
    pub row: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(row: usize, message: impl Into<String>) -> Self {
        Self { row, message: message.into() }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scenario is not valid:\n{0}")]
    Validation(ValidationReport),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
