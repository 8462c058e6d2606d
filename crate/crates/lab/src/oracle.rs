use std::time::Instant;

use doubling_tree::chains::TaggedRule;
use doubling_tree::exact::moments::{exact_moment_path, m_k_closed};
use doubling_tree::exact::{
    exact_size_distribution, exact_statistic_distribution, float_moment, m_k, rational_string, ExactChain,
};
use serde_json::{json, Map, Value};

use crate::config::{Engine, ExperimentConfig};
use crate::output::{fmt_f64, CsvTable, OutDir};
use crate::record::RunRecord;
use crate::LabError;

pub const ORACLE_JSON: &str = "oracle.json";
pub const ORACLE_MOMENTS_CSV: &str = "oracle_moments.csv";
pub const M_K_MAX: u32 = 10;

fn chain_of(c: &ExperimentConfig) -> Result<ExactChain, LabError> {
    Ok(match c.engine {
        Engine::Size | Engine::Explicit => ExactChain::Size,
        Engine::Degree => ExactChain::Degree,
        Engine::Profile => ExactChain::Profile,
        Engine::Tagged => ExactChain::Tagged { k: c.k, rule: TaggedRule::Exact },
        other => return Err(LabError::Config(format!("no exact oracle for engine {:?}", other.name()))),
    })
}

/// Limits `m_k`, the exact first two moments of `B_n` for `n` up to the
/// size cap, and the exact law of the selected chain at each configured `n`.
pub fn cmd_oracle(c: &ExperimentConfig) -> Result<RunRecord, LabError> {
    c.validate()?;
    let chain = chain_of(c)?;
    let start = Instant::now();
    let caps = &c.oracle_caps;
    let mut mk = Map::new();
    let mut closed_agree = true;
    for k in 1..=M_K_MAX {
        let v = m_k(k);
        closed_agree &= m_k_closed(k) == v;
        mk.insert(k.to_string(), Value::String(rational_string(&v)));
    }

    let mut moments = CsvTable::new(
        "dtlab.oracle_moments",
        ["n", "E[B_n]", "E[B_n]-2n", "E[B_n^2]", "E[B_n^2]-(5n^2-n)", "float E[B_n^2]/n^2"].map(String::from).to_vec(),
    );
    let mut all_zero = true;
    exact_moment_path(caps.size_n, 2, |j, m| {
        let dev1 = &m[0] - 2 * j as i128;
        let dev2 = &m[1] - (5 * (j as i128) * (j as i128) - j as i128);
        all_zero &= dev1 == 0.into() && dev2 == 0.into();
        let ratio = if j == 0 { String::new() } else { fmt_f64(float_moment(j, 2) / (j as f64 * j as f64)) };
        moments.push(vec![
            j.to_string(),
            m[0].to_string(),
            dev1.to_string(),
            m[1].to_string(),
            dev2.to_string(),
            ratio,
        ]);
    });

    let mut laws = Map::new();
    for &n in &c.n {
        let v = match chain {
            ExactChain::Size => exact_size_distribution(n, caps)?.to_json(),
            other => exact_statistic_distribution(n, other, caps)?.to_json_with(|s| s.label()),
        };
        laws.insert(n.to_string(), v);
    }
    let chain_json = serde_json::to_value(chain).expect("serializable");
    let out = json!({
        "m_k": mk,
        "m_k_closed_form_agrees": closed_agree,
        "moments_match_closed_forms": all_zero,
        "chain": chain_json,
        "distributions": laws,
    });
    let dir = OutDir::create(&c.out_dir())?;
    dir.write_json(ORACLE_JSON, &out)?;
    dir.write_csv(ORACLE_MOMENTS_CSV, &moments)?;
    let mut record = RunRecord::new("oracle", c);
    record.files = vec![ORACLE_JSON.into(), ORACLE_MOMENTS_CSV.into()];
    record.summary.insert("moments_match_closed_forms".into(), f64::from(u8::from(all_zero)));
    record.summary.insert("m_k_closed_form_agrees".into(), f64::from(u8::from(closed_agree)));
    record.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
    dir.write_json(&RunRecord::file_name("oracle"), &record)?;
    Ok(record)
}
