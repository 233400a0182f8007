use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use meanlab_cli::{run, Command, Overrides, STATUS_INPUT};

/// Evaluate and analyse generalized integral means from JSON job files.
#[derive(Debug, Parser)]
#[command(name = "meanlab", version)]
struct Args {
    /// What to run.
    #[arg(value_enum)]
    command: Command,
    /// Job file (JSON).
    #[arg(long)]
    job: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized cross-validation (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of decision-grid points (default 33).
    #[arg(long)]
    grid: Option<usize>,
    /// Tolerance override: route agreement for `eval`, all orders for `derivative-check`.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.job) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read job file {}: {e}", args.job.display());
            return ExitCode::from(STATUS_INPUT as u8);
        }
    };
    let overrides = Overrides {
        seed: args.seed,
        grid: args.grid,
        tol: args.tol,
    };
    let outcome = run(args.command, &text, &overrides);
    print!("{}", outcome.table);
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, outcome.report_json()) {
            eprintln!("cannot write report {}: {e}", path.display());
            return ExitCode::from(STATUS_INPUT as u8);
        }
    }
    ExitCode::from(outcome.status as u8)
}
