use std::collections::BTreeMap;
use std::path::Path;

use doubling_tree::verify::TestReport;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::LabError;

pub const TOOL: &str = "dtlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything one command produced. Per-replicate raw outputs live in the
/// CSV files listed in `files`; wall-clock timings are the only
/// non-deterministic part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    pub reports: Vec<TestReport>,
    pub timings_s: BTreeMap<String, f64>,
}

impl RunRecord {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunRecord {
            tool: TOOL.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            config: config.clone(),
            files: Vec::new(),
            summary: BTreeMap::new(),
            reports: Vec::new(),
            timings_s: BTreeMap::new(),
        }
    }

    /// File name of this command's record inside the output directory.
    pub fn file_name(command: &str) -> String {
        format!("{command}_record.json")
    }

    /// Every gated check of every report passed.
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let r: Self = serde_json::from_str(&text)
            .map_err(|e| LabError::Record { path: path.display().to_string(), reason: e.to_string() })?;
        if r.tool != TOOL {
            return Err(LabError::Record { path: path.display().to_string(), reason: format!("tool {:?}", r.tool) });
        }
        Ok(r)
    }
}
