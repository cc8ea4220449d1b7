//! Experiment driver around [`alerting_core`]: loads a declarative
//! experiment description, fans trials out across a thread pool, and
//! emits deterministic CSV tables plus human-readable summaries.
//!
//! Four operations are exposed, mirroring the binary's subcommands:
//!
//! - [`analyze`]: the closed-form protocol comparison table (bribery
//!   resistance, transaction footprint, latency class) straight from
//!   the game-theoretic bounds — no simulation involved.
//! - [`simulate`]: seeded monte-carlo rounds against rational nodes,
//!   reporting empirical suppression rates and adversary utility with
//!   confidence intervals, with an exact value-conservation check on
//!   every single round.
//! - [`attack`]: the early-opening bribery walkthrough comparing the
//!   plain-hash commit-reveal protocol against the device-backed one.
//! - [`verify`]: cross-checking suites (closed forms vs. brute-force
//!   enumeration, engines vs. analytic predictions) for use as an
//!   operational smoke test.

pub mod analyze;
pub mod attack;
pub mod config;
pub mod simulate;
pub mod verify;

use std::path::Path;

use thiserror::Error;

/// Driver-level failures, split by exit-code class: configuration
/// problems (exit 2) versus invariant violations discovered while
/// running (exit 1).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code for this failure class: `2` for anything the
    /// user can fix in the invocation or config file, `1` for checks
    /// that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Invariant(_) => 1,
        }
    }
}

/// Writes `content` to `path`, classifying failures as config errors
/// (the path came from the invocation).
pub fn write_output(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}
