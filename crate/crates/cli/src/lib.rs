//! Batch front-end: run catalogue scenarios or configuration files, evaluate
//! their checks and write CSV artifacts.

pub mod config;
pub mod describe;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("output: {0}")]
    Output(String),

    #[error("check could not be evaluated: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] twophase_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage, configuration and output errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use twophase_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Output(_) | CliError::Io(_) => 2,
            CliError::Core(E::UnknownScenario { .. } | E::Malformed(_) | E::Io(_)) => 2,
            _ => 1,
        }
    }
}
