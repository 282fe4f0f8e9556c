//! Reproducible experiment runs driven by JSON configurations.
//!
//! A run validates its config, evaluates the estimator, writes one CSV per
//! statistic into `output_dir` and finally a manifest describing the files.
//! With a fixed seed the CSV bytes do not depend on the worker count.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod run;

use std::path::Path;
use std::time::{Duration, Instant};

pub use config::{EnsembleConfig, Estimator, ExperimentConfig, SampleLaw, ShiftSpec, ValidationError, ValidationErrors};
pub use output::{fmt_f64, RunManifest, Table};
pub use run::{compute, RunOutput};

use crate::parallel::partition;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration:\n{0}")]
    Validation(#[from] ValidationErrors),
    #[error(transparent)]
    Runtime(#[from] crate::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Process exit code: 1 for configuration errors, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Runtime(_) | RunError::Io(_) => 2,
        }
    }
}

/// Validate, compute and write. Returns the manifest that was written.
pub fn run(config: &ExperimentConfig) -> Result<(RunManifest, RunOutput), RunError> {
    config.validate()?;
    output::remove_manifest(Path::new(&config.output_dir), &config.name)?;
    let start = Instant::now();
    let out = compute(config)?;
    let manifest = write_run(config, &out, start.elapsed())?;
    Ok((manifest, out))
}

/// Write the tables of a computed run and its manifest.
pub fn write_run(config: &ExperimentConfig, out: &RunOutput, wall_time: Duration) -> Result<RunManifest, RunError> {
    let mut manifest = RunManifest {
        name: config.name.clone(),
        estimator: config.estimator.kind().into(),
        config_hash: output::sha256_hex(config.to_json().as_bytes()),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.effective_seed(),
        samples: config.samples,
        workers: config.workers,
        worker_ranges: partition(config.samples as u64, config.workers)
            .into_iter()
            .map(|r| (r.start, r.end))
            .collect(),
        wall_time_seconds: wall_time.as_secs_f64(),
        failures: out.failures.clone(),
        files: Vec::new(),
        passed: out.passed,
    };
    output::write_outputs(Path::new(&config.output_dir), &config.name, &out.tables, &mut manifest)?;
    Ok(manifest)
}
