//! Experiment runner for the `reldiff` command-line tool.
//!
//! Each experiment turns a [`RunConfig`] into CSV tables and a versioned
//! `summary.json`; [`run`] writes them and reports whether every configured
//! threshold passed.

pub mod config;
pub mod experiments;
pub mod output;

use reldiff::analytic::AnalyticError;
use reldiff::ensemble::EnsembleError;
use reldiff::fokker_planck::FokkerPlanckError;
use reldiff::langevin::LangevinError;
use reldiff::lorentz::LorentzError;
use std::path::PathBuf;
use thiserror::Error;

pub use config::{Experiment, RunConfig};
pub use output::{Check, Outcome, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical blowup: {0}")]
    Blowup(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for bad configuration, 3 for a numerical
    /// blowup, 4 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Blowup(_) => 3,
            CliError::Internal(_) | CliError::Io(_) | CliError::Json(_) => 4,
        }
    }
}

impl From<LangevinError> for CliError {
    fn from(e: LangevinError) -> Self {
        match e {
            LangevinError::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Blowup(other.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FokkerPlanckError> for CliError {
    fn from(e: FokkerPlanckError) -> Self {
        match e {
            FokkerPlanckError::Singular(_) => CliError::Blowup(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<LorentzError> for CliError {
    fn from(e: LorentzError) -> Self {
        match e {
            LorentzError::Domain(m) => CliError::Config(m),
            LorentzError::Statistics(s) => s.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.outcome.pass()
    }

    /// 0 when every threshold passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Runs the configured experiment and writes its artifacts to
/// `config.output.directory`.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let outcome = experiments::run_experiment(config)?;
    let files = output::write_outcome(config, &outcome, &config.output.directory)?;
    Ok(RunReport { outcome, files })
}
