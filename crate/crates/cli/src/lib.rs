//! Experiment runner behind the `bosonet` binary.

pub mod analyze;
pub mod config;
pub mod record;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(transparent)]
    Core(bosonet::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<bosonet::Error> for CliError {
    fn from(e: bosonet::Error) -> Self {
        match e {
            bosonet::Error::Config(m) => CliError::Config(m),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 2 optimisation failure, 3 configuration, 4 missing input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(bosonet::Error::OptimizationFailure { .. }) => 2,
            CliError::Config(_) | CliError::Core(bosonet::Error::InvalidCutoff(_)) => 3,
            CliError::MissingInput(_) => 4,
            _ => 1,
        }
    }
}
