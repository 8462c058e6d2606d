use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Below => value < threshold,
            Comparison::AtMost => value <= threshold,
            Comparison::Above => value > threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equal => value == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Below => "<",
            Comparison::AtMost => "<=",
            Comparison::Above => ">",
            Comparison::AtLeast => ">=",
            Comparison::Equal => "==",
        }
    }
}

/// One statistic compared against one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    /// Ungated checks are reported but do not affect the verdict.
    pub gated: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub n: Vec<u64>,
    pub replicates: u64,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub sample_size: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub meta: ReportMeta,
}

impl TestReport {
    pub fn new(name: impl Into<String>, sample_size: u64, meta: ReportMeta) -> Self {
        TestReport { name: name.into(), sample_size, checks: Vec::new(), passed: true, meta }
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> bool {
        self.push(name, value, comparison, threshold, true)
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> bool {
        self.push(name, value, comparison, threshold, false)
    }

    /// Pass/fail condition that is not a numeric comparison.
    pub fn require(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.push(name, f64::from(u8::from(ok)), Comparison::Equal, 1.0, true)
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        value: f64,
        comparison: Comparison,
        threshold: f64,
        gated: bool,
    ) -> bool {
        let passed = comparison.holds(value, threshold);
        self.checks.push(Check { name: name.into(), value, comparison, threshold, gated, passed });
        if gated && !passed {
            self.passed = false;
        }
        passed
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.meta.notes.push(text.into());
    }

    pub fn value(&mut self, key: impl Into<String>, v: f64) {
        self.meta.values.insert(key.into(), v);
    }

    /// Re-derive the verdict from the gated checks.
    pub fn recompute(&mut self) {
        for c in &mut self.checks {
            c.passed = c.comparison.holds(c.value, c.threshold);
        }
        self.passed = self.checks.iter().all(|c| !c.gated || c.passed);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.gated && !c.passed)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "### {}: {verdict}\n", self.name);
        let _ = writeln!(
            s,
            "seed {}, n = {:?}, replicates {}, sample size {}\n",
            self.meta.seed, self.meta.n, self.meta.replicates, self.sample_size
        );
        let _ = writeln!(s, "| check | value | threshold | gated | result |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "| {} | {:.6} | {} {} | {} | {} |",
                c.name.replace('|', "\\|"),
                c.value,
                c.comparison.symbol(),
                c.threshold,
                if c.gated { "yes" } else { "no" },
                if c.passed { "ok" } else { "miss" }
            );
        }
        for note in &self.meta.notes {
            let _ = writeln!(s, "\n- {note}");
        }
        s
    }
}
