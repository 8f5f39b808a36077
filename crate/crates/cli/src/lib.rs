//! Experiment runner behind the `thinscope` binary: configuration, scenario
//! runs with artifact emission, and validation reports.

pub mod config;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, MapSelection, PRESETS};
pub use run::{run_scenario, RunReport};
pub use validate::run_validation;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or unusable output location; nothing was computed.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    /// A validation suite ran and at least one check failed.
    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
            CliError::ValidationFailed(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) | CliError::ValidationFailed(m) => m,
        }
    }
}

impl From<thinscope::Error> for CliError {
    fn from(e: thinscope::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Worker count from `THINSCOPE_THREADS`; `None` means automatic.
pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!("THINSCOPE_THREADS must be a non-negative integer, got {v:?}"))),
        },
    }
}
