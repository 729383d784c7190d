//! Human-readable tables to stdout, machine CSV to files.

use crate::CliError;
use colinv::experiments::{ExperimentResults, TrialRecord};
use colinv::sim::{SweepRecord, SweepSummary};
use std::io::Write;
use std::path::Path;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// CSV of per-trial experiment rows.
pub fn experiment_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "family,size,solver,epsilon,trial,err_l2,err_F,err_rF,bound_F,bound_rF,iters_mean\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{}x{},{},{:?},{},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            r.family,
            r.rows,
            r.cols,
            r.solver,
            r.epsilon,
            r.trial,
            r.err_l2,
            r.err_f,
            r.err_rf,
            r.bound_f,
            r.bound_rf,
            r.iters_mean
        ));
    }
    out
}

fn order_str(order: Option<i32>) -> String {
    match order {
        Some(o) => format!("1e{o}"),
        None => "-".to_string(),
    }
}

/// Human summary: one row per epsilon with means and orders of magnitude.
pub fn print_experiment_summary(results: &ExperimentResults) {
    println!(
        "{:>10}  {:>12} {:>8}  {:>12} {:>8}  {:>12} {:>8}  {:>10}",
        "epsilon", "err_l2", "O(l2)", "err_F", "O(F)", "err_rF", "O(rF)", "iters/col"
    );
    for s in &results.summaries {
        println!(
            "{:>10e}  {:>12.4e} {:>8}  {:>12.4e} {:>8}  {:>12.4e} {:>8}  {:>10.1}",
            s.epsilon,
            s.mean_err_l2,
            order_str(s.order_l2),
            s.mean_err_f,
            order_str(s.order_f),
            s.mean_err_rf,
            order_str(s.order_rf),
            s.mean_iters
        );
    }
    for (trial, attempts) in &results.resample_events {
        eprintln!("note: trial {trial} resampled {attempts} time(s) after a singular draw");
    }
}

/// CSV of straggler sweep runs: one row per simulated run.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("r,seed,recovery,completion_time,total_load\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:?},{}\n",
            r.r,
            r.seed,
            u8::from(r.decode_ok),
            r.completion_time,
            r.total_load
        ));
    }
    out
}

pub fn print_sweep_summary(summaries: &[SweepSummary]) {
    println!(
        "{:>4}  {:>8}  {:>14}  {:>16}  {:>14}",
        "r", "trials", "recovery_rate", "mean_completion", "mean_load"
    );
    for s in summaries {
        println!(
            "{:>4}  {:>8}  {:>14.3}  {:>16.2}  {:>14.1}",
            s.r, s.trials, s.recovery_rate, s.mean_completion_time, s.mean_total_load
        );
    }
}

/// Small matrices print as CSV on stdout when no --out was given.
pub fn print_matrix_csv(m: &colinv::DenseMatrix) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let mut buf = Vec::new();
    colinv::io::write_csv(&mut buf, m).map_err(|e| CliError::Input(e.to_string()))?;
    lock.write_all(&buf)
        .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
}
