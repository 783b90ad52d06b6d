use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes of the operands do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A value lies outside the domain of the operation (non-finite entry, non-positive step, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A size precondition failed (too short, too large, empty).
    #[error("size error: {0}")]
    Size(String),
    /// An iterative or factorization routine failed.
    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn size_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Size(msg.into()))
}
