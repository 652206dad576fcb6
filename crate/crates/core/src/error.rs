use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameters out of range: {0}")]
    OutOfRange(String),

    #[error("point does not belong to the {expected} space: {reason}")]
    SpaceMismatch { expected: String, reason: String },

    #[error("duplicate point id {0}")]
    DuplicateId(u64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("sketching requires a probability gap (p1 > p2)")]
    NoProbabilityGap,

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn out_of_range(msg: impl Into<String>) -> Self {
        Error::OutOfRange(msg.into())
    }
}
