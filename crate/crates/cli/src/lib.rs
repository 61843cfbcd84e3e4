//! Config-driven experiment runner: reads a TOML experiment, runs the
//! requested analyses and writes plain-text (and optionally JSON) artifacts
//! plus a hashed manifest.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalogue;
pub mod config;
pub mod output;
mod runner;

use std::path::PathBuf;

use thiserror::Error;

pub use runner::{run_experiment, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    /// Overrides `output.dir`.
    pub out: Option<PathBuf>,
    /// Run analyses one after another on a single thread.
    pub sequential: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    /// Artifact names in manifest order (the manifest itself excluded).
    pub artifacts: Vec<String>,
    pub statuses: Vec<(String, Status)>,
}

impl RunSummary {
    /// 3 if any analysis failed at runtime, else 4 if an asserted hypothesis
    /// failed, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.statuses.iter().any(|(_, s)| matches!(s, Status::Error(_))) {
            EXIT_RUNTIME
        } else if self.statuses.iter().any(|(_, s)| matches!(s, Status::HypothesisFailed(_))) {
            EXIT_HYPOTHESIS
        } else {
            EXIT_OK
        }
    }
}

/// Parses, validates and runs the experiment in `opts.config`.
pub fn run(opts: &RunOptions) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", opts.config.display())))?;
    let experiment = config::ExperimentConfig::from_toml(&text)?.validate()?;
    let out_dir = opts.out.clone().unwrap_or_else(|| experiment.config.output.dir.clone());
    if opts.sequential {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        pool.install(|| run_experiment(&experiment, &out_dir, true))
    } else {
        run_experiment(&experiment, &out_dir, false)
    }
}
