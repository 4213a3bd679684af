//! Scenario runner for the `hermitize` command-line tool.
//!
//! Every run is described by one JSON [`config::ScenarioConfig`]. The
//! pipeline integrates the metric, builds a vielbein frame in the requested
//! gauge, evolves a state, and emits one [`report::DiagnosticRecord`] per
//! grid node. Exit codes: 0 success, 1 configuration error, 2 invariant
//! violation.

pub mod config;
pub mod report;
pub mod scenario;
pub mod sweep;

use hermitize_core::HermitizeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant `{name}` violated: {source}", name = .0.invariant(), source = .0)]
    Invariant(HermitizeError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }

    /// Short label: `configuration`, `io`, or the violated invariant.
    pub fn label(&self) -> &'static str {
        match self {
            CliError::Config(_) => "configuration",
            CliError::Io(_) => "io",
            CliError::Invariant(e) => e.invariant(),
        }
    }
}

impl From<HermitizeError> for CliError {
    fn from(e: HermitizeError) -> Self {
        if e.invariant() == "configuration" {
            CliError::Config(e.to_string())
        } else {
            CliError::Invariant(e)
        }
    }
}
