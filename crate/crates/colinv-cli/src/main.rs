mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit codes: 0 success, 1 input error, 2 numerical failure.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "colinv",
    about = "Estimate matrix inverses and pseudoinverses column by column, \
             check the error bounds, and simulate straggler-robust distributed runs",
    version
)]
struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix file (CSV or CINV binary, detected by content).
    matrix: PathBuf,
    /// Least-squares solver for the column problems.
    #[arg(long, value_parser = ["sd", "cg"], default_value = "sd")]
    solver: String,
    /// Termination tolerance (gradient norm for sd, displacement for cg).
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Iteration cap per column; defaults to 50x the problem dimension.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the estimate to this file (.bin selects the binary format).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the inverse of a nonsingular square matrix.
    Invert {
        #[command(flatten)]
        solve: SolveArgs,
        /// Rescale the problem: a positive factor, or `auto` for
        /// 1/sigma_min.
        #[arg(long)]
        scale: Option<String>,
    },
    /// Estimate the left pseudoinverse of a tall full-rank matrix.
    Pinv {
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Run an accuracy sweep over a matrix family (a published table preset
    /// or a key=value spec file).
    Experiment {
        /// Spec file in key=value form; see the README for keys.
        #[arg(long, conflicts_with = "table")]
        spec: Option<PathBuf>,
        /// Published table preset: 1..=4.
        #[arg(long)]
        table: Option<u8>,
        /// Override the preset/spec trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Write per-trial rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a master/worker run with replicated column blocks.
    Simulate {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        workers: usize,
        /// Replication factor r: each block lives on r cyclically
        /// consecutive workers.
        #[arg(long, default_value_t = 1)]
        replication: usize,
        /// Straggler model: `none`, `fixed:ID[,ID...]`, `bernoulli:P`, or
        /// `expdelay:BASE,RATE`.
        #[arg(long, default_value = "none")]
        straggler_model: String,
        /// Estimate the pseudoinverse instead of the inverse.
        #[arg(long)]
        pinv: bool,
        /// Sweep these replication factors (comma-separated) instead of a
        /// single run, reporting recovery rate and load per r.
        #[arg(long, conflicts_with = "replication")]
        sweep_r: Option<String>,
        /// Trials per sweep point.
        #[arg(long, default_value_t = 100)]
        sweep_trials: usize,
    },
    /// Empirically check the error bounds on a matrix family.
    CheckBounds {
        #[arg(long, value_parser = ["spd", "gaussian", "rect"], default_value = "spd")]
        family: String,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Square size (spd/gaussian) or rows for rect (cols = rows / 2).
        #[arg(long, default_value_t = 50)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Invert { solve, scale } => commands::invert(&solve, scale.as_deref(), cli.seed),
        Command::Pinv { solve } => commands::pinv(&solve, cli.seed),
        Command::Experiment {
            spec,
            table,
            trials,
            out,
        } => commands::experiment(spec.as_deref(), table, trials, out.as_deref(), cli.seed),
        Command::Simulate {
            solve,
            workers,
            replication,
            straggler_model,
            pinv,
            sweep_r,
            sweep_trials,
        } => commands::simulate(
            &solve,
            workers,
            replication,
            &straggler_model,
            pinv,
            sweep_r.as_deref(),
            sweep_trials,
            cli.seed,
        ),
        Command::CheckBounds {
            family,
            eps,
            trials,
            size,
            out,
        } => commands::check_bounds(&family, eps, trials, size, out.as_deref(), cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// COLINV_THREADS caps the worker pool; 0 or unset means automatic.
fn configure_threads() {
    if let Ok(value) = std::env::var("COLINV_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
