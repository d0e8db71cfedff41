//! Configuration, dispatch and artifact writing behind the `rcm` binary.

pub mod config;
pub mod output;
mod run;

use thiserror::Error;

pub use config::{ExperimentConfig, Task};
pub use run::{run, Overrides, Summary};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    NonConvergence(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::VerifyFailed(_) => 4,
        }
    }
}
