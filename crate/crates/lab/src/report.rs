use std::fmt::Write;
use std::path::{Path, PathBuf};

use doubling_tree::exact::m_k;
use doubling_tree::verify::{height_constant, TestReport, ONE_PLUS_LN2};
use num_traits::ToPrimitive;

use crate::record::RunRecord;
use crate::LabError;

pub const REPORT_MD: &str = "report.md";

/// Every `*_record.json` directly inside `dir`, sorted by file name.
pub fn find_records(dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let entries = std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))?;
    let mut out = Vec::new();
    for e in entries {
        let p = e.map_err(|e| LabError::io(dir, e))?.path();
        if p.file_name().and_then(|f| f.to_str()).is_some_and(|f| f.ends_with("_record.json")) {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(LabError::Record { path: dir.display().to_string(), reason: "no run records".into() });
    }
    Ok(out)
}

fn num<T: ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Reference constants with the property they come from.
pub fn constants_table() -> Vec<(String, f64, &'static str)> {
    let mut rows = Vec::new();
    for k in 1..=4 {
        rows.push((format!("moment limit m_{k}"), num(m_k(k)), "moment limits of B_n/n"));
    }
    for i in 0..=3 {
        rows.push((format!("degree i={i}: target {}", 0.5f64.powi(i + 1)), 0.5f64.powi(i + 1), "degree proportions"));
    }
    rows.push((format!("height LB constant {:.6}", height_constant()), height_constant(), "height lower bound"));
    rows.push(("fill-in time limit ln 2".into(), std::f64::consts::LN_2, "continuous-time coupling"));
    rows.push(("growth rate 1 + ln 2".into(), ONE_PLUS_LN2, "continuous-time growth"));
    rows.push(("E[size of tau_2^inf] = 17/3".into(), 17.0 / 3.0, "double-everywhere tree"));
    rows
}

/// Empirical values of a report next to their targets.
fn comparisons(r: &TestReport) -> Vec<(String, f64, f64)> {
    let v = &r.meta.values;
    let get = |k: &str| v.get(k).copied();
    let mut rows = Vec::new();
    match r.name.as_str() {
        "moments" => {
            for k in 1..=8 {
                if let (Some(mc), Some(lim)) = (get(&format!("mc_k{k}")), get(&format!("m_k{k}"))) {
                    rows.push((format!("E[(B_n/n)^{k}]"), mc, lim));
                }
            }
        }
        "degree_limit" => {
            for i in 0..16 {
                if let Some(m) = get(&format!("mean_u{i}")) {
                    let t = 0.5f64.powi(i + 1);
                    rows.push((format!("degree i={i}: target {t}"), m, t));
                }
            }
        }
        "kappa_clt" => {
            if let (Some(m), Some(c)) = (get("mean"), get("center")) {
                rows.push(("mean kappa(n)".into(), m, c));
            }
        }
        "profile" => {
            if let (Some(m), Some(c)) = (get("mean_height"), get("center")) {
                rows.push(("mean tagged height".into(), m, c));
            }
        }
        "height_lb" => {
            if let Some(m) = get("mean_ratio") {
                rows.push((format!("H_n / ln n vs height LB constant {:.6}", height_constant()), m, height_constant()));
            }
            if let Some(m) = get("late_delta_ell_mean") {
                rows.push(("late fill-in time".into(), m, std::f64::consts::LN_2));
            }
            if let Some(m) = get("ct_growth_rate") {
                rows.push(("ln N(t) / t".into(), m, ONE_PLUS_LN2));
            }
        }
        "rrt" => {
            if let Some(m) = get("mean_ratio") {
                rows.push(("RRT h_n / ln n".into(), m, std::f64::consts::E));
            }
        }
        "inf_tree" => {
            for n in &r.meta.n {
                if let (Some(m), Some(b)) = (get(&format!("mean_n{n}")), get(&format!("bound_n{n}"))) {
                    rows.push((format!("mean size n={n} vs lower bound"), m, b));
                }
            }
        }
        "sum_reciprocal" => {
            if let (Some(m), Some(t)) = (get("mean_sum"), get("target")) {
                rows.push(("sum of 1/(B_i+1)".into(), m, t));
            }
        }
        _ => {}
    }
    rows
}

pub fn render(records: &[(PathBuf, RunRecord)]) -> String {
    let mut s =
        String::from("# Run report\n\n## Reference constants\n\n| quantity | value | property |\n|---|---|---|\n");
    for (name, v, prop) in constants_table() {
        let _ = writeln!(s, "| {name} | {v:.6} | {prop} |");
    }
    for (path, rec) in records {
        let file = path.file_name().and_then(|f| f.to_str()).unwrap_or("?");
        let _ = writeln!(
            s,
            "\n## {} ({file})\n\nexperiment `{}`, seed {}, {} {}, files: {}\n",
            rec.command,
            rec.config.name,
            rec.config.seed,
            rec.tool,
            rec.version,
            rec.files.join(", ")
        );
        if !rec.summary.is_empty() {
            let _ = writeln!(s, "| summary | value |\n|---|---|");
            for (k, v) in &rec.summary {
                let _ = writeln!(s, "| {k} | {v:.6} |");
            }
        }
        let rows: Vec<_> = rec.reports.iter().flat_map(comparisons).collect();
        if !rows.is_empty() {
            let _ = writeln!(s, "\n| quantity | empirical | target |\n|---|---|---|");
            for (name, e, t) in rows {
                let _ = writeln!(s, "| {name} | {e:.6} | {t:.6} |");
            }
        }
        for r in &rec.reports {
            s.push('\n');
            s.push_str(&r.to_markdown());
        }
    }
    s
}

/// Combines every run record in `dir` into one markdown file, written to
/// `out` or to `dir/report.md`.
pub fn cmd_report(dir: &Path, out: Option<&Path>) -> Result<PathBuf, LabError> {
    let records =
        find_records(dir)?.into_iter().map(|p| RunRecord::load(&p).map(|r| (p, r))).collect::<Result<Vec<_>, _>>()?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join(REPORT_MD));
    std::fs::write(&target, render(&records)).map_err(|e| LabError::io(&target, e))?;
    Ok(target)
}
