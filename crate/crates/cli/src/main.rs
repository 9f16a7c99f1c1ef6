//! `locality run <config.json>`: run a bound sweep and write `bounds.csv`
//! and `report.json`.
//!
//! Exit status: 0 all bounds satisfied, 2 some bound violated, 1 config,
//! I/O or numerical error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use locality_core::harness::{self, RunConfig, RunOptions, Suite};

#[derive(Parser)]
#[command(name = "locality", version, about = "Exact-diagonalization checks of energy-localization bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for grid evaluation.
        #[arg(long)]
        threads: Option<usize>,
        /// Run only these suites (repeatable).
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
        #[arg(long, hide = true)]
        inject_violation: bool,
    },
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
    suites: Vec<String>,
    inject_violation: bool,
) -> anyhow::Result<i32> {
    let mut cfg = RunConfig::load(&config)?;
    if !suites.is_empty() {
        cfg.suites = suites.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?;
        cfg.validate()?;
    }
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let record = harness::run(&cfg, RunOptions { inject_violation })?;
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("locality-out"));
    let (csv, json) = harness::write_outputs(&record, &dir)?;

    let violations = record.violations();
    println!("{} rows, {} violations", record.rows.len(), violations.len());
    for v in violations.iter().take(20) {
        println!("  VIOLATION {}", harness::csv_line(v));
    }
    for f in &record.decay_fit {
        match (f.slope, &f.notice) {
            (Some(slope), _) => println!(
                "  decay fit seed {} eps {:.4}: slope {:.4} (-lambda = {:.4}), curvature {:.4}, {}",
                f.seed,
                f.eps,
                slope,
                -f.lambda,
                f.curvature.unwrap_or(f64::NAN),
                if f.passed == Some(true) { "ok" } else { "FAILED" }
            ),
            (None, Some(n)) => println!("  decay fit seed {} eps {:.4}: {n}", f.seed, f.eps),
            _ => {}
        }
    }
    for (suite, secs) in &record.suite_seconds {
        println!("  {suite}: {secs:.2} s");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(record.exit_code())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for violations here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let Command::Run { config, out, threads, suites, inject_violation } = cli.command;
    match run(config, out, threads, suites, inject_violation) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
