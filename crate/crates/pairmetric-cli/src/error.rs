//! CLI error type mapped onto process exit codes.

use pairmetric_core::Error as CoreError;

/// Exit codes: 0 success, 1 completed-with-flags / suite failure, 2 I/O
/// error, 3 invalid input.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Invalid(_) | CliError::Core(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        // serde errors name the offending field / position
        CliError::Invalid(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
