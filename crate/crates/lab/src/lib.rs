//! Batch experiments on the doubling random recursive tree.
//!
//! Every subcommand of the `dtlab` binary is a function here taking an
//! [`ExperimentConfig`] and returning a [`RunRecord`], so the CLI is a thin
//! argument parser over this crate.

pub mod config;
pub mod oracle;
pub mod output;
pub mod record;
pub mod report;
pub mod simulate;
pub mod verify;

use doubling_tree::error::CapExceeded;
use doubling_tree::verify::VerifyError;
use thiserror::Error;

pub use config::{Engine, ExperimentConfig};
pub use record::RunRecord;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_GATED_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown verification procedure {0:?}")]
    UnknownTest(String),
    #[error("resource cap: {0}")]
    Cap(#[from] CapExceeded),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad run record {path}: {reason}")]
    Record { path: String, reason: String },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Cap(_) => EXIT_CAP,
            _ => EXIT_USAGE,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }
}

impl From<VerifyError> for LabError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::UnknownProcedure(name) => LabError::UnknownTest(name),
            VerifyError::Cap(c) => LabError::Cap(c),
        }
    }
}

/// Run `f` on a worker pool of the configured size.
pub fn with_pool<T: Send>(parallelism: usize, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    Ok(pool.install(f))
}
