//! Experiment driver: seeded matrix families, per-trial error reports against
//! the direct-elimination reference, and order-of-magnitude summaries.
//!
//! A trial's matrix is a pure function of `(seed, trial, attempt)` and is
//! shared across the epsilon sweep, so sweeps compare solver accuracy on the
//! same draws. If the reference inverse hits the singularity threshold (a
//! measure-zero event for the Gaussian families) the draw is resampled with a
//! fresh attempt index and the event is recorded.

use crate::engine::{estimate_inverse, estimate_pseudoinverse, EngineError, EstimateMode};
use crate::gen::{sample_matrix, MatrixFamily};
use crate::matrix::{DenseMatrix, MatrixError};
use crate::metrics::{
    corollary_bound_values, error_report, prop1_bound_values, BOUND_SIGMA_TOL,
};
use crate::solvers::{SolverConfig, SolverMethod};
use crate::spectral::spectral_summary;
use std::fmt;

/// A family/size/solver sweep specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub family: MatrixFamily,
    pub rows: usize,
    pub cols: usize,
    pub solver: SolverConfig,
    /// Strictly decreasing termination tolerances, one sweep point each.
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// Error type for the experiment driver.
#[derive(Debug)]
pub enum ExperimentError {
    InvalidSpec(&'static str),
    Engine(EngineError),
    Matrix(MatrixError),
    /// A draw stayed singular after this many resample attempts.
    ResampleExhausted { trial: usize, attempts: u64 },
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::InvalidSpec(msg) => write!(f, "invalid experiment spec: {msg}"),
            ExperimentError::Engine(e) => write!(f, "{e}"),
            ExperimentError::Matrix(e) => write!(f, "{e}"),
            ExperimentError::ResampleExhausted { trial, attempts } => {
                write!(f, "trial {trial}: still singular after {attempts} resamples")
            }
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<EngineError> for ExperimentError {
    fn from(e: EngineError) -> Self {
        ExperimentError::Engine(e)
    }
}

impl From<MatrixError> for ExperimentError {
    fn from(e: MatrixError) -> Self {
        ExperimentError::Matrix(e)
    }
}

/// One (epsilon, trial) run: the CSV row unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub family: MatrixFamily,
    pub rows: usize,
    pub cols: usize,
    pub solver: SolverMethod,
    pub epsilon: f64,
    pub trial: usize,
    pub err_l2: f64,
    pub err_f: f64,
    pub err_rf: f64,
    pub bound_f: f64,
    pub bound_rf: f64,
    /// Mean solver iterations per estimated column/row.
    pub iters_mean: f64,
}

/// Mean errors over the trials of one epsilon, with base-10 orders.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    pub mean_err_l2: f64,
    pub mean_err_f: f64,
    pub mean_err_rf: f64,
    pub order_l2: Option<i32>,
    pub order_f: Option<i32>,
    pub order_rf: Option<i32>,
    pub mean_iters: f64,
}

/// Full output of one table experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<EpsilonSummary>,
    /// `(trial, extra attempts)` for draws that had to be resampled.
    pub resample_events: Vec<(usize, u64)>,
}

/// `floor(log10(x))`, or `None` for a zero/non-finite mean.
pub fn order_of_magnitude(x: f64) -> Option<i32> {
    if x > 0.0 && x.is_finite() {
        Some(x.log10().floor() as i32)
    } else {
        None
    }
}

impl ExperimentSpec {
    fn validate(&self, mode: EstimateMode) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::InvalidSpec("trials must be at least 1"));
        }
        if self.epsilons.is_empty() {
            return Err(ExperimentError::InvalidSpec("epsilons must be nonempty"));
        }
        if !self
            .epsilons
            .windows(2)
            .all(|w| w[0] > w[1] && w[1] > 0.0)
            || !(self.epsilons[0] > 0.0)
        {
            return Err(ExperimentError::InvalidSpec(
                "epsilons must be positive and strictly decreasing",
            ));
        }
        match mode {
            EstimateMode::Inverse => {
                if self.rows != self.cols {
                    return Err(ExperimentError::InvalidSpec("inverse sweeps need a square size"));
                }
            }
            EstimateMode::Pseudoinverse => {
                if self.rows <= self.cols {
                    return Err(ExperimentError::InvalidSpec(
                        "pseudoinverse sweeps need rows > cols",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Samples the matrix for one trial (attempt 0).
pub fn gen_matrix(spec: &ExperimentSpec, trial: usize) -> DenseMatrix {
    sample_matrix(spec.family, spec.rows, spec.cols, spec.seed, trial as u64, 0)
}

const MAX_RESAMPLE_ATTEMPTS: u64 = 32;

/// Draws the trial matrix and its elimination reference, resampling with a
/// fresh attempt index if the draw is singular to working precision.
fn gen_with_reference(
    spec: &ExperimentSpec,
    trial: usize,
    mode: EstimateMode,
) -> Result<(DenseMatrix, DenseMatrix, u64), ExperimentError> {
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let a = sample_matrix(
            spec.family,
            spec.rows,
            spec.cols,
            spec.seed,
            trial as u64,
            attempt,
        );
        let reference = match mode {
            EstimateMode::Inverse => a.direct_inverse(),
            EstimateMode::Pseudoinverse => a
                .gram()
                .direct_inverse()
                .map(|binv| binv.matmul(&a.transpose()).expect("shapes agree")),
        };
        match reference {
            Ok(reference) => return Ok((a, reference, attempt)),
            Err(MatrixError::Singular { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(ExperimentError::ResampleExhausted {
        trial,
        attempts: MAX_RESAMPLE_ATTEMPTS,
    })
}

/// Runs the full sweep: every epsilon over every trial, errors measured
/// against the elimination reference.
pub fn run_table_experiment(
    spec: &ExperimentSpec,
    mode: EstimateMode,
) -> Result<ExperimentResults, ExperimentError> {
    spec.validate(mode)?;

    // Trial draws are epsilon-independent; sample them (and their spectral
    // extremes, which the bound formulas reuse across the sweep) once.
    let mut trials = Vec::with_capacity(spec.trials);
    let mut resample_events = Vec::new();
    for trial in 0..spec.trials {
        let (a, reference, attempts) = gen_with_reference(spec, trial, mode)?;
        if attempts > 0 {
            resample_events.push((trial, attempts));
        }
        let spectrum = spectral_summary(&a, BOUND_SIGMA_TOL, 10_000);
        trials.push((a, reference, spectrum));
    }

    let targets = spec.cols;

    let mut records = Vec::with_capacity(spec.epsilons.len() * spec.trials);
    let mut summaries = Vec::with_capacity(spec.epsilons.len());
    for &epsilon in &spec.epsilons {
        let mut cfg = spec.solver.clone();
        cfg.epsilon = epsilon;
        let mut sums = (0.0, 0.0, 0.0, 0.0);
        for (trial, (a, reference, spectrum)) in trials.iter().enumerate() {
            let estimate = match mode {
                EstimateMode::Inverse => estimate_inverse(a, &cfg)?,
                EstimateMode::Pseudoinverse => estimate_pseudoinverse(a, &cfg)?,
            };
            let report = error_report(reference, &estimate.matrix)?;
            let (bound_f, bound_rf) = match mode {
                EstimateMode::Inverse => {
                    prop1_bound_values(spec.rows, epsilon, spectrum.sigma_min)
                }
                EstimateMode::Pseudoinverse => corollary_bound_values(
                    spec.cols,
                    epsilon,
                    spectrum.sigma_min,
                    spectrum.kappa2,
                ),
            };
            let iters_mean = estimate.total_iterations() as f64 / targets as f64;
            sums.0 += report.err_l2;
            sums.1 += report.err_f;
            sums.2 += report.err_rf;
            sums.3 += iters_mean;
            records.push(TrialRecord {
                family: spec.family,
                rows: spec.rows,
                cols: spec.cols,
                solver: spec.solver.method,
                epsilon,
                trial,
                err_l2: report.err_l2,
                err_f: report.err_f,
                err_rf: report.err_rf,
                bound_f,
                bound_rf,
                iters_mean,
            });
        }
        let t = spec.trials as f64;
        let (mean_l2, mean_f, mean_rf, mean_iters) =
            (sums.0 / t, sums.1 / t, sums.2 / t, sums.3 / t);
        summaries.push(EpsilonSummary {
            epsilon,
            mean_err_l2: mean_l2,
            mean_err_f: mean_f,
            mean_err_rf: mean_rf,
            order_l2: order_of_magnitude(mean_l2),
            order_f: order_of_magnitude(mean_f),
            order_rf: order_of_magnitude(mean_rf),
            mean_iters,
        });
    }
    Ok(ExperimentResults {
        records,
        summaries,
        resample_events,
    })
}

/// The four published sweeps. `seed` selects the draw stream; the shapes,
/// families, solvers and tolerance grids are fixed.
pub fn table_preset(table: u8, seed: u64) -> Option<(ExperimentSpec, EstimateMode)> {
    let sd_epsilons = vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
    let cg_epsilons = vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
    match table {
        1 => {
            let mut solver = SolverConfig::new(SolverMethod::Sd, 1e-5, 100);
            solver.max_iters = 5_000_000;
            Some((
                ExperimentSpec {
                    family: MatrixFamily::GaussianScaled { scale: 50.0 },
                    rows: 100,
                    cols: 100,
                    solver,
                    epsilons: sd_epsilons,
                    trials: 20,
                    seed,
                },
                EstimateMode::Inverse,
            ))
        }
        2 => {
            let mut solver = SolverConfig::new(SolverMethod::Cg, 1e-7, 100);
            solver.max_iters = 10_000;
            Some((
                ExperimentSpec {
                    family: MatrixFamily::SymmetricGaussian { scale: 25.0 },
                    rows: 100,
                    cols: 100,
                    solver,
                    epsilons: cg_epsilons,
                    trials: 20,
                    seed,
                },
                EstimateMode::Inverse,
            ))
        }
        3 => {
            let mut solver = SolverConfig::new(SolverMethod::Sd, 1e-5, 50);
            solver.max_iters = 5_000_000;
            Some((
                ExperimentSpec {
                    family: MatrixFamily::GaussianRect,
                    rows: 100,
                    cols: 50,
                    solver,
                    epsilons: sd_epsilons,
                    trials: 20,
                    seed,
                },
                EstimateMode::Pseudoinverse,
            ))
        }
        4 => {
            let mut solver = SolverConfig::new(SolverMethod::Cg, 1e-7, 50);
            solver.max_iters = 10_000;
            Some((
                ExperimentSpec {
                    family: MatrixFamily::GaussianRect,
                    rows: 100,
                    cols: 50,
                    solver,
                    epsilons: cg_epsilons,
                    trials: 20,
                    seed,
                },
                EstimateMode::Pseudoinverse,
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            family: MatrixFamily::GaussianScaled { scale: 1.0 },
            rows: 6,
            cols: 6,
            solver: SolverConfig::new(SolverMethod::Cg, 1e-8, 6),
            epsilons: vec![1e-4, 1e-6],
            trials: 3,
            seed: 42,
        }
    }

    #[test]
    fn spec_validation_catches_bad_epsilons() {
        let mut spec = tiny_spec();
        spec.epsilons = vec![1e-4, 1e-4];
        assert!(matches!(
            run_table_experiment(&spec, EstimateMode::Inverse),
            Err(ExperimentError::InvalidSpec(_))
        ));
        spec.epsilons = vec![];
        assert!(run_table_experiment(&spec, EstimateMode::Inverse).is_err());
        let mut spec = tiny_spec();
        spec.trials = 0;
        assert!(run_table_experiment(&spec, EstimateMode::Inverse).is_err());
    }

    #[test]
    fn sweep_produces_one_record_per_eps_trial() {
        let spec = tiny_spec();
        let res = run_table_experiment(&spec, EstimateMode::Inverse).unwrap();
        assert_eq!(res.records.len(), 6);
        assert_eq!(res.summaries.len(), 2);
        // Smaller epsilon must not increase the mean error by much; with CG
        // the error drops hard.
        assert!(res.summaries[1].mean_err_f <= res.summaries[0].mean_err_f);
    }

    #[test]
    fn gen_matrix_is_reproducible_across_runs() {
        let spec = tiny_spec();
        assert_eq!(gen_matrix(&spec, 2), gen_matrix(&spec, 2));
        assert_ne!(gen_matrix(&spec, 0), gen_matrix(&spec, 1));
    }

    #[test]
    fn order_of_magnitude_edges() {
        assert_eq!(order_of_magnitude(5e-5), Some(-5));
        assert_eq!(order_of_magnitude(1e-5), Some(-5));
        assert_eq!(order_of_magnitude(9.99e-5), Some(-5));
        assert_eq!(order_of_magnitude(150.0), Some(2));
        assert_eq!(order_of_magnitude(0.0), None);
    }

    #[test]
    fn table_presets_exist_and_reject_unknown() {
        for t in 1..=4u8 {
            assert!(table_preset(t, 0).is_some());
        }
        assert!(table_preset(5, 0).is_none());
    }
}
