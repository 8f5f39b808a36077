//! Validation suites with a JSON report.

use serde::Serialize;
use thinscope::validation::{run_suite, Suite, SuiteReport};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub version: &'static str,
    pub seed: u64,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs `suite` (one name or `all`). An unknown name is a configuration
/// error; failing checks are reported, not raised, so the caller can
/// still write the report.
pub fn run_validation(suite: &str, seed: u64) -> Result<ValidationReport, CliError> {
    let selection = Suite::parse_selection(suite).map_err(|e| CliError::Config(e.to_string()))?;
    let suites = selection.into_iter().map(|s| run_suite(s, seed)).collect::<Result<Vec<_>, _>>()?;
    let pass = suites.iter().all(|s| s.pass);
    Ok(ValidationReport { version: thinscope::VERSION, seed, pass, suites })
}
