use std::path::{Path, PathBuf};

use doubling_tree::exact::OracleCaps;
use doubling_tree::tree::DEFAULT_NODE_CAP;
use doubling_tree::verify::{SuiteConfig, Thresholds};
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DTLAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "dtlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Arena simulator of the tree itself.
    Explicit,
    Size,
    Degree,
    Profile,
    Tagged,
    Skeleton,
    Rrt,
    /// Double-everywhere tree.
    Inf,
}

impl Engine {
    pub const ALL: [Engine; 8] = [
        Engine::Explicit,
        Engine::Size,
        Engine::Degree,
        Engine::Profile,
        Engine::Tagged,
        Engine::Skeleton,
        Engine::Rrt,
        Engine::Inf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Explicit => "explicit",
            Engine::Size => "size",
            Engine::Degree => "degree",
            Engine::Profile => "profile",
            Engine::Tagged => "tagged",
            Engine::Skeleton => "skeleton",
            Engine::Rrt => "rrt",
            Engine::Inf => "inf",
        }
    }

    pub fn parse(s: &str) -> Result<Self, LabError> {
        Engine::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| LabError::Config(format!("unknown engine {s:?}")))
    }
}

/// One experiment. Every field except `seed` has a default; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: Vec<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    /// Number of tagged nodes.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Degree classes `U_0..U_m`; the last one pools higher degrees.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default = "default_node_cap")]
    pub node_cap: usize,
    /// Limits of the exact oracles, also used by `verify` in place of
    /// `suite.caps`.
    #[serde(default)]
    pub oracle_caps: OracleCaps,
    /// Procedures run by `verify`; empty means all of them.
    #[serde(default)]
    pub tests: Vec<String>,
    /// Overrides `suite.thresholds` when present.
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub suite: SuiteConfig,
    /// Worker threads; 0 uses one per core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_n() -> Vec<u64> {
    vec![1000]
}
fn default_replicates() -> u64 {
    100
}
fn default_k() -> usize {
    2
}
fn default_m() -> usize {
    3
}
fn default_engine() -> Engine {
    Engine::Size
}
fn default_node_cap() -> usize {
    DEFAULT_NODE_CAP
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let c: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(LabError::Config("n values must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(LabError::Config("replicates must be positive".into()));
        }
        Ok(())
    }

    /// Suite parameters with the threshold and cap overrides applied.
    pub fn effective_suite(&self) -> SuiteConfig {
        let mut s = self.suite.clone();
        s.caps = self.oracle_caps;
        if let Some(t) = &self.thresholds {
            s.thresholds = t.clone();
        }
        s
    }

    /// `output_dir`, else `$DTLAB_OUT`, else `./dtlab-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_required_and_unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json("{}").is_err());
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "replicate": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"seed": 1, "n": [0]}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"seed": 1, "engine": "tagged"}"#).unwrap();
        assert_eq!(c.engine, Engine::Tagged);
        assert_eq!(c.n, vec![1000]);
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::with_seed(9);
        c.tests = vec!["moments".into()];
        c.thresholds = Some(Thresholds { kappa_ks: 0.0, ..Thresholds::default() });
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn engine_names() {
        for e in Engine::ALL {
            assert_eq!(Engine::parse(e.name()).unwrap(), e);
        }
        assert!(Engine::parse("ct").is_err());
    }
}
