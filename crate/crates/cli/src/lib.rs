//! Experiment runners behind the `kicked-spin` binary: configuration,
//! output tables and the acceptance checks run by `verify`.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use kicked_spin::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("{0}")]
    NotConverged(Error),
    #[error("{failed} acceptance criteria failed")]
    Acceptance { failed: usize },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => CliError::NotConverged(e),
            Error::InvalidParameter { .. } | Error::SizeGuard { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    /// Process exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Acceptance { .. } => 5,
        }
    }
}
