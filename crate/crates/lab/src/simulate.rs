use std::time::Instant;

use doubling_tree::chains::profile::sample_height;
use doubling_tree::chains::size::sample_size_and_kappa;
use doubling_tree::chains::skeleton::sample_kappa;
use doubling_tree::chains::{rrt_height, DegreeChainState, TaggedHeightsState, TaggedRule};
use doubling_tree::error::CapExceeded;
use doubling_tree::rng::RngStream;
use doubling_tree::stats::mean_ci;
use doubling_tree::tree::{grow_inf, grow_with_cap};
use doubling_tree::verify::{procedure_seed, run_replicates};

use crate::config::{Engine, ExperimentConfig};
use crate::output::{fmt_f64, CsvTable, OutDir};
use crate::record::RunRecord;
use crate::{with_pool, LabError};

pub const SIMULATE_CSV: &str = "simulate.csv";
pub const SIMULATE_SUMMARY_CSV: &str = "simulate_summary.csv";

type RowField = fn(&Row) -> Option<f64>;

/// One replicate. Fields an engine does not produce are `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Row {
    pub b: Option<u64>,
    pub kappa: Option<u64>,
    pub height: Option<u64>,
    pub degrees: Option<Vec<u64>>,
    pub tags: Option<Vec<u32>>,
}

/// Largest possible node count after `n` steps, `2^(n+1) - 1`.
fn worst_case_nodes(n: u64) -> u128 {
    if n >= 126 {
        u128::MAX
    } else {
        (1u128 << (n + 1)) - 1
    }
}

/// The explicit engines refuse `n` unless even the worst case fits the cap.
pub fn check_node_cap(engine: Engine, n: u64, cap: usize) -> Result<(), CapExceeded> {
    let worst = worst_case_nodes(n);
    if matches!(engine, Engine::Explicit | Engine::Inf) && worst > cap as u128 {
        return Err(CapExceeded {
            what: "worst-case node",
            needed: worst.min(u64::MAX as u128) as u64,
            cap: cap as u64,
        });
    }
    Ok(())
}

pub fn simulate_one(engine: Engine, n: u64, c: &ExperimentConfig, rng: &mut RngStream) -> Result<Row, CapExceeded> {
    let mut row = Row::default();
    match engine {
        Engine::Explicit => {
            let t = grow_with_cap(n, c.node_cap, rng)?;
            let s = t.summarize();
            row.b = Some(s.size_b);
            row.kappa = Some(s.kappa);
            row.height = Some(u64::from(s.height));
            row.degrees = Some(pool_degrees(&s.degree_hist, c.m));
            row.tags = Some(t.sample_node_heights(c.k, rng));
        }
        Engine::Size => {
            let (b, k) = sample_size_and_kappa(n, rng);
            row.b = Some(b);
            row.kappa = Some(k);
        }
        Engine::Degree => {
            let mut s = DegreeChainState::new();
            for _ in 0..n {
                s.step(rng);
            }
            row.b = Some(s.b());
            row.degrees = Some(s.truncated(c.m));
        }
        Engine::Profile => {
            row.height = Some(u64::from(sample_height(n, rng)));
        }
        Engine::Tagged => {
            let mut s = TaggedHeightsState::new(c.k, TaggedRule::Exact);
            s.run(n, rng);
            row.b = Some(s.b());
            row.height = Some(u64::from(s.profile().height()));
            row.tags = Some(s.heights().to_vec());
        }
        Engine::Skeleton => row.kappa = Some(sample_kappa(n, rng)),
        Engine::Rrt => row.height = Some(u64::from(rrt_height(n, rng))),
        Engine::Inf => {
            let t = grow_inf(n, c.node_cap, rng)?;
            row.b = Some(t.size() as u64 - 1);
        }
    }
    Ok(row)
}

/// `U_0..U_{m-1}` and the pooled class `U_m`.
fn pool_degrees(hist: &[u64], m: usize) -> Vec<u64> {
    let mut x: Vec<u64> = (0..m).map(|i| hist.get(i).copied().unwrap_or(0)).collect();
    x.push(hist.iter().skip(m).sum());
    x
}

fn header(c: &ExperimentConfig) -> Vec<String> {
    let mut h: Vec<String> = ["replicate", "n", "B", "kappa", "H"].map(String::from).to_vec();
    h.extend((0..=c.m).map(|i| format!("U_{i}")));
    h.extend((1..=c.k).map(|j| format!("tag_{j}")));
    h
}

fn cells<T: ToString>(v: Option<&[T]>, width: usize) -> Vec<String> {
    match v {
        Some(xs) => (0..width).map(|i| xs.get(i).map(T::to_string).unwrap_or_default()).collect(),
        None => vec![String::new(); width],
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs the engine for every `n` and writes `simulate.csv` (one row per
/// replicate, in replicate order) and `simulate_summary.csv`.
pub fn cmd_simulate(c: &ExperimentConfig) -> Result<RunRecord, LabError> {
    c.validate()?;
    for &n in &c.n {
        check_node_cap(c.engine, n, c.node_cap)?;
    }
    let start = Instant::now();
    let mut rows = CsvTable::new("dtlab.simulate", header(c));
    let mut summary = CsvTable::new(
        "dtlab.simulate_summary",
        ["n", "column", "count", "mean", "sd", "ci_half_width"].map(String::from).to_vec(),
    );
    let mut record = RunRecord::new("simulate", c);
    for &n in &c.n {
        let master = procedure_seed(c.seed, &format!("simulate:{}:{n}", c.engine.name()));
        let out =
            with_pool(c.parallelism, || run_replicates(master, c.replicates, |rng| simulate_one(c.engine, n, c, rng)))?;
        let out: Vec<Row> = out.into_iter().collect::<Result<_, _>>()?;
        for (i, r) in out.iter().enumerate() {
            let mut line = vec![i.to_string(), n.to_string(), opt(r.b), opt(r.kappa), opt(r.height)];
            line.extend(cells(r.degrees.as_deref(), c.m + 1));
            line.extend(cells(r.tags.as_deref(), c.k));
            rows.push(line);
        }
        let columns: [(&str, RowField); 3] = [
            ("B", |r| r.b.map(|x| x as f64)),
            ("kappa", |r| r.kappa.map(|x| x as f64)),
            ("H", |r| r.height.map(|x| x as f64)),
        ];
        for (name, get) in columns {
            let xs: Vec<f64> = out.iter().filter_map(get).collect();
            if xs.is_empty() {
                continue;
            }
            let e = mean_ci(&xs);
            summary.push(vec![
                n.to_string(),
                name.into(),
                xs.len().to_string(),
                fmt_f64(e.mean),
                fmt_f64(e.sd),
                fmt_f64(e.half_width),
            ]);
            record.summary.insert(format!("mean_{name}_n{n}"), e.mean);
        }
    }
    let dir = OutDir::create(&c.out_dir())?;
    dir.write_csv(SIMULATE_CSV, &rows)?;
    dir.write_csv(SIMULATE_SUMMARY_CSV, &summary)?;
    record.files = vec![SIMULATE_CSV.into(), SIMULATE_SUMMARY_CSV.into()];
    record.timings_s.insert("total".into(), start.elapsed().as_secs_f64());
    dir.write_json(&RunRecord::file_name("simulate"), &record)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use doubling_tree::rng::stream;

    #[test]
    fn explicit_cap_is_checked_up_front() {
        assert!(check_node_cap(Engine::Explicit, 40, 100_000_000).is_err());
        assert!(check_node_cap(Engine::Explicit, 20, 100_000_000).is_ok());
        assert!(check_node_cap(Engine::Size, 1_000_000, 10).is_ok());
    }

    #[test]
    fn every_engine_produces_its_columns() {
        let c = ExperimentConfig::with_seed(1);
        for e in Engine::ALL {
            let r = simulate_one(e, 12, &c, &mut stream(3)).unwrap();
            let any = r.b.is_some() || r.kappa.is_some() || r.height.is_some();
            assert!(any, "{e:?}");
            if let Some(d) = &r.degrees {
                assert_eq!(d.len(), c.m + 1);
                assert_eq!(d.iter().sum::<u64>(), r.b.unwrap() + 1);
            }
            if let Some(t) = &r.tags {
                assert_eq!(t.len(), c.k);
            }
        }
    }
}
