//! Batch runner for xplab experiments: TOML configs in, JSON reports and CSV tables out.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{list, run, RunArgs, Written};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "XPLAB_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lib(#[from] xplab::Error),
    #[error("cannot write {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("cannot read witness: {0}")]
    Witness(String),
    #[error("--workers must be at least 1")]
    Workers,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for resource caps, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Workers | CliError::Witness(_) => 2,
            CliError::Lib(e) if e.is_resource() => 3,
            CliError::Lib(xplab::Error::Argument(_) | xplab::Error::Shape(_)) => 2,
            _ => 1,
        }
    }
}
