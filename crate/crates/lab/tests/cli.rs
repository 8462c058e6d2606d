use std::path::Path;
use std::process::{Command, Output};

use dtree_lab::output::CsvTable;
use dtree_lab::{ExperimentConfig, RunRecord, EXIT_CAP, EXIT_GATED_FAILURE, EXIT_PASS, EXIT_USAGE};

fn dtlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DTLAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn size_engine_writes_one_row_per_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        dtlab(&["simulate", "--seed", "7", "--engine", "size", "--n", "1000000", "--replicates", "500"], dir.path());
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
    let t = CsvTable::parse(&std::fs::read(dir.path().join("simulate.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 500);
    assert_eq!(t.header[..5], ["replicate", "n", "B", "kappa", "H"]);
    assert!(t.rows.iter().all(|r| r[1] == "1000000" && !r[2].is_empty() && r[4].is_empty()));
    let rec = RunRecord::load(&dir.path().join("simulate_record.json")).unwrap();
    assert_eq!(rec.config.replicates, 500);
}

#[test]
fn explicit_engine_without_cap_override_hits_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtlab(&["simulate", "--seed", "1", "--engine", "explicit", "--n", "40"], dir.path());
    assert_eq!(code(&o), EXIT_CAP);
    let o = dtlab(
        &[
            "simulate",
            "--seed",
            "1",
            "--engine",
            "explicit",
            "--n",
            "40",
            "--cap",
            "5000000000000",
            "--replicates",
            "3",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identical_seeds_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for engine in ["explicit", "tagged", "degree", "inf"] {
        let args = ["simulate", "--seed", "99", "--engine", engine, "--n", "12,20", "--replicates", "40"];
        assert_eq!(code(&dtlab(&args, a.path())), EXIT_PASS);
        assert_eq!(code(&dtlab(&args, b.path())), EXIT_PASS);
        for f in ["simulate.csv", "simulate_summary.csv"] {
            let x = std::fs::read(a.path().join(f)).unwrap();
            assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{engine} {f}");
        }
    }
}

#[test]
fn parallelism_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["simulate", "--seed", "5", "--engine", "profile", "--n", "5000", "--replicates", "64"];
    let mut one = base.to_vec();
    one.extend(["--parallelism", "1"]);
    let mut four = base.to_vec();
    four.extend(["--parallelism", "4"]);
    assert_eq!(code(&dtlab(&one, a.path())), EXIT_PASS);
    assert_eq!(code(&dtlab(&four, b.path())), EXIT_PASS);
    assert_eq!(
        std::fs::read(a.path().join("simulate.csv")).unwrap(),
        std::fs::read(b.path().join("simulate.csv")).unwrap()
    );
}

#[test]
fn oracle_writes_rational_laws() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtlab(&["oracle", "--seed", "1", "--n", "2"], dir.path());
    assert_eq!(code(&o), EXIT_PASS);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(v["distributions"]["2"], serde_json::json!({"3": "2/3", "6": "1/3"}));
    assert_eq!(v["m_k"]["3"], "50/3");
    assert_eq!(v["moments_match_closed_forms"], true);
    let t = CsvTable::parse(&std::fs::read(dir.path().join("oracle_moments.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 61);
    assert!(t.rows.iter().all(|r| r[2] == "0" && r[4] == "0"));

    let o = dtlab(&["oracle", "--seed", "1", "--n", "61"], dir.path());
    assert_eq!(code(&o), EXIT_CAP);
    let o = dtlab(&["oracle", "--seed", "1", "--n", "3", "--engine", "tagged"], dir.path());
    assert_eq!(code(&o), EXIT_PASS);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dtlab(&["verify", "--seed", "1", "--test", "nope"], dir.path());
    assert_eq!(code(&o), EXIT_USAGE);
    let o = dtlab(&["verify"], dir.path());
    assert_eq!(code(&o), EXIT_USAGE);

    let o = dtlab(&["verify", "--seed", "1", "--test", "fixed_point", "--test", "oracle_equivalence"], dir.path());
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "PASS fixed_point\nPASS oracle_equivalence\n");

    // Thresholds tightened to zero fail with a report.
    let mut c = ExperimentConfig::with_seed(1);
    c.tests = vec!["degree_limit".into()];
    c.suite.degree_limit.n = 2000;
    c.suite.degree_limit.replicates = 10;
    c.thresholds = Some(doubling_tree::verify::Thresholds { degree_abs: 0.0, ..Default::default() });
    let cfg = dir.path().join("tight.json");
    std::fs::write(&cfg, c.to_json()).unwrap();
    let o = dtlab(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), EXIT_GATED_FAILURE);
    let md = std::fs::read_to_string(dir.path().join("verify.md")).unwrap();
    assert!(md.contains("### degree_limit: FAIL"));
}

#[test]
fn bad_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 1, "replicatez": 4}"#).unwrap();
    assert_eq!(code(&dtlab(&["simulate", "--config", cfg.to_str().unwrap()], dir.path())), EXIT_USAGE);
    std::fs::write(&cfg, r#"{"n": [10]}"#).unwrap();
    assert_eq!(code(&dtlab(&["simulate", "--config", cfg.to_str().unwrap()], dir.path())), EXIT_USAGE);
    assert_eq!(code(&dtlab(&["simulate", "--seed", "1", "--engine", "nope"], dir.path())), EXIT_USAGE);
    assert_eq!(code(&dtlab(&["simulate", "--seed", "1", "--n", "0"], dir.path())), EXIT_USAGE);
}

#[test]
fn report_combines_records() {
    let dir = tempfile::tempdir().unwrap();
    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dtlab")).arg("report").arg(empty.path()).output().unwrap();
    assert_eq!(code(&o), EXIT_USAGE);

    assert_eq!(code(&dtlab(&["simulate", "--seed", "3", "--n", "100", "--replicates", "10"], dir.path())), EXIT_PASS);
    let o =
        dtlab(&["verify", "--seed", "3", "--test", "degree_limit", "--n", "3000", "--replicates", "20"], dir.path());
    assert!(matches!(code(&o), EXIT_PASS | EXIT_GATED_FAILURE));
    let o = Command::new(env!("CARGO_BIN_EXE_dtlab")).arg("report").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), EXIT_PASS);
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("degree i=0: target 0.5"));
    assert!(md.contains("height LB constant 2.196"));
    assert!(md.contains("## simulate (simulate_record.json)"));
    assert!(md.contains("### degree_limit"));

    std::fs::write(dir.path().join("broken_record.json"), "{").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dtlab")).arg("report").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), EXIT_USAGE);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dtlab"))
        .args(["simulate", "--seed", "2", "--n", "50", "--replicates", "2"])
        .env("DTLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), EXIT_PASS);
    assert!(dir.path().join("simulate.csv").exists());
}
