use std::path::Path;

use thiserror::Error;

/// Failure of a subcommand, carrying the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("invalid frame: {0}")]
    Frame(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Frame(_) => 4,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }
}

impl From<tfatom::Error> for CliError {
    fn from(err: tfatom::Error) -> Self {
        match err {
            tfatom::Error::SingularFrame { .. } | tfatom::Error::UnsupportedConfiguration(_) => {
                CliError::Frame(err.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
