use thiserror::Error;

/// Errors surfaced by the library.
///
/// `InvalidArgument` covers anything a caller can fix (bad parameter ranges,
/// empty grids, malformed weight tables). `Inconsistency` means two internal
/// routes that must agree did not; it indicates a bug, not bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for weight table of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }
}
