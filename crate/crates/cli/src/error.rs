//! CLI error type with a fixed exit-code contract: 0 success, 1 usage or
//! I/O problems, 2 a run that blew up, 3 a check command whose verdict is
//! FAIL.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] polarmix::Error),
    #[error("seed {seed} blew up at iteration {iteration}")]
    Blowup { seed: u64, iteration: u64 },
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                polarmix::Error::Blowup { .. } => 2,
                _ => 1,
            },
            CliError::Blowup { .. } => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
