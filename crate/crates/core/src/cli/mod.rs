//! Front end shared by the `aimd` binary: config files, writers and the
//! command implementations. Commands write only to the directory they are
//! given and print a short summary to the supplied writer.

pub mod commands;
pub mod config;
pub mod output;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::error::{ConfigError, EngineError, SpectralError};

pub use commands::{
    cmd_simulate, cmd_spectral, cmd_stochastic, cmd_sweep, cmd_verify, SimulateArgs, StochasticArgs,
    SweepArgs, SweepParam, VerifyArgs,
};

/// Exit status for a command that ran and passed its checks.
pub const EXIT_OK: u8 = 0;
/// A check failed (tolerance breach, non-Schur spectrum, validator error).
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Bad arguments or an unreadable/invalid config.
pub const EXIT_USAGE: u8 = 2;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "AIMD_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("output validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ReadConfig { .. } | CliError::Config(_) | CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_CHECK_FAILED,
        }
    }
}
