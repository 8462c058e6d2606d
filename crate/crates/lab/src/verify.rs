use std::time::Instant;

use doubling_tree::verify::{TestReport, PROCEDURES};

use crate::config::ExperimentConfig;
use crate::output::OutDir;
use crate::record::RunRecord;
use crate::{with_pool, LabError};

pub const VERIFY_JSON: &str = "verify_reports.json";
pub const VERIFY_MD: &str = "verify.md";

pub fn selected_tests(c: &ExperimentConfig) -> Result<Vec<String>, LabError> {
    if c.tests.is_empty() {
        return Ok(PROCEDURES.iter().map(|s| s.to_string()).collect());
    }
    for t in &c.tests {
        if !PROCEDURES.contains(&t.as_str()) {
            return Err(LabError::UnknownTest(t.clone()));
        }
    }
    Ok(c.tests.clone())
}

/// Runs the selected procedures; the record passes iff every gated check did.
pub fn cmd_verify(c: &ExperimentConfig) -> Result<RunRecord, LabError> {
    let tests = selected_tests(c)?;
    let suite = c.effective_suite();
    let mut record = RunRecord::new("verify", c);
    let mut reports: Vec<TestReport> = Vec::new();
    for t in &tests {
        let start = Instant::now();
        let r = with_pool(c.parallelism, || suite.run(t, c.seed))??;
        record.timings_s.insert(t.clone(), start.elapsed().as_secs_f64());
        record.summary.insert(format!("{t}_passed"), f64::from(u8::from(r.passed)));
        reports.push(r);
    }
    let mut md = String::from("# Verification\n\n");
    for r in &reports {
        md.push_str(&r.to_markdown());
        md.push('\n');
    }
    let dir = OutDir::create(&c.out_dir())?;
    dir.write_json(VERIFY_JSON, &reports)?;
    dir.write_bytes(VERIFY_MD, md.as_bytes())?;
    record.reports = reports;
    record.files = vec![VERIFY_JSON.into(), VERIFY_MD.into()];
    dir.write_json(&RunRecord::file_name("verify"), &record)?;
    Ok(record)
}
