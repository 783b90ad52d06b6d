use thiserror::Error;

/// Failures mapped onto the process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config keys or values. Exit code 2.
    #[error("usage: {0}")]
    Usage(String),
    /// Unreadable or malformed files. Exit code 3.
    #[error("i/o: {0}")]
    Io(String),
    /// A computation or invariant suite failed. Exit code 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<vissm::Error> for CliError {
    fn from(e: vissm::Error) -> Self {
        match e {
            vissm::Error::Io(m) => CliError::Io(m),
            vissm::Error::Parse { .. } => CliError::Io(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
