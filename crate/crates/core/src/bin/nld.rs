//! Command-line runner for nonlocal-dispersal logistic experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nonlocal_logistic::cli::{run, Command, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "nld",
    about = "Steady states, principal values and total-population diagnostics \
             for the nonlocal-dispersal logistic model",
    after_help = "Commands: solve | mu0 | sweep | criterion | bounds | examples | selftest\n\
                  Exit codes: 0 success, 1 check failure, 2 config error, 3 solver failure."
)]
struct Args {
    /// Command to run.
    command: String,

    /// Path to the experiment config (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory for config echo, report.json and CSVs
    /// (defaults to the config's output_dir, then to "nld-out").
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (fallback: NLD_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Print per-check outcomes and progress to stderr.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let threads = args.threads.or_else(|| {
        std::env::var("NLD_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("nld: could not configure {n} threads: {e}");
        }
    }

    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nld: {e}");
            return ExitCode::from(2);
        }
    };
    let resolved = match ExperimentConfig::from_path(&args.config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("nld: {e}");
            return ExitCode::from(2);
        }
    };
    let out_dir = args
        .out
        .or_else(|| resolved.config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("nld-out"));

    match run(command, &resolved, &out_dir, args.verbose) {
        Ok(report) => {
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            println!(
                "{}: {} checks, {} failed; outputs in {}",
                report.command,
                report.checks.len(),
                failed.len(),
                out_dir.display()
            );
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("nld: failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("nld: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
