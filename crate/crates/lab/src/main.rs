use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dtree_lab::config::{Engine, ExperimentConfig, OUT_DIR_ENV};
use dtree_lab::oracle::cmd_oracle;
use dtree_lab::report::cmd_report;
use dtree_lab::simulate::cmd_simulate;
use dtree_lab::verify::{cmd_verify, selected_tests};
use dtree_lab::{LabError, EXIT_GATED_FAILURE, EXIT_PASS};

/// Experiments on random recursive trees with doubling at the root.
///
/// Exit codes: 0 pass, 1 gated verification failure, 2 usage or
/// configuration error, 3 resource cap exceeded.
#[derive(Parser)]
#[command(name = "dtlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample replicates from an engine and write them as CSV.
    Simulate(Common),
    /// Write exact laws and moments as JSON with rational strings.
    Oracle(Common),
    /// Run verification procedures; exits 1 if a gated check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Procedure to run (repeatable); default is the whole suite.
        #[arg(long = "test")]
        tests: Vec<String>,
    },
    /// Combine the run records of a directory into one markdown file.
    Report {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config. Flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Step counts, comma separated. For verify, the main size of each selected test.
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long)]
    replicates: Option<u64>,
    /// explicit, size, degree, profile, tagged, skeleton, rrt or inf.
    #[arg(long)]
    engine: Option<String>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Node cap for simulate, state support cap for oracle and verify.
    #[arg(long)]
    cap: Option<usize>,
}

impl Common {
    fn config(&self, simulate: bool) -> Result<ExperimentConfig, LabError> {
        let mut c = match (&self.config, self.seed) {
            (Some(p), _) => ExperimentConfig::load(p)?,
            (None, Some(s)) => ExperimentConfig::with_seed(s),
            (None, None) => return Err(LabError::Config("either --config or --seed is required".into())),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if !self.n.is_empty() {
            c.n = self.n.clone();
        }
        if let Some(r) = self.replicates {
            c.replicates = r;
        }
        if let Some(e) = &self.engine {
            c.engine = Engine::parse(e)?;
        }
        if let Some(o) = &self.out {
            c.output_dir = Some(o.clone());
        }
        if let Some(p) = self.parallelism {
            c.parallelism = p;
        }
        if let Some(cap) = self.cap {
            if simulate {
                c.node_cap = cap;
            } else {
                c.oracle_caps.support = cap;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Simulate(common) => {
            let c = common.config(true)?;
            cmd_simulate(&c)?;
            println!("wrote {}", c.out_dir().display());
            Ok(EXIT_PASS)
        }
        Command::Oracle(common) => {
            let c = common.config(false)?;
            cmd_oracle(&c)?;
            println!("wrote {}", c.out_dir().display());
            Ok(EXIT_PASS)
        }
        Command::Verify { common, tests } => {
            let mut c = common.config(false)?;
            if !tests.is_empty() {
                c.tests = tests;
            }
            let n = (!common.n.is_empty()).then(|| common.n[0]);
            for t in selected_tests(&c)? {
                c.suite.set_scale(&t, n, common.replicates)?;
            }
            let record = cmd_verify(&c)?;
            for r in &record.reports {
                println!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
            }
            Ok(if record.passed() { EXIT_PASS } else { EXIT_GATED_FAILURE })
        }
        Command::Report { dir, out } => {
            let p = cmd_report(&dir, out.as_deref())?;
            println!("wrote {}", p.display());
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dtlab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
