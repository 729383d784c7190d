//! Simulated master/worker execution of the column solves with stragglers.
//!
//! The master partitions column indices into contiguous near-equal blocks and
//! replicates each block on `r` cyclically consecutive workers, so no worker
//! holds two replicas of one block. Workers solve their assigned columns
//! (deterministically, so replicas agree bit for bit) and send their results
//! once; the master decodes each block from its earliest-finishing replica.
//!
//! Worker cost is the intrinsic signal available here — total solver
//! iterations — plus a sampled delay from the configured straggler model.
//! Workers marked straggling by the fixed-set and Bernoulli models never
//! respond; the shifted-exponential model only delays. A block whose replicas
//! all straggle is zero-filled and flagged rather than failing the run, so
//! sweeps can measure recovery rates.

use crate::engine::{
    solve_inverse_outcomes, solve_pinv_outcomes, EngineError, EstimateMode, InverseEstimate,
};
use crate::gen::derive_rng;
use crate::matrix::{DenseMatrix, Vector};
use crate::solvers::{SolveError, SolveOutcome, SolverConfig, Termination};
use rand_core::RngCore;
use std::fmt;

/// Error type for assignment construction and simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    ReplicationOutOfRange { r: usize, workers: usize },
    NoColumns,
    /// Assignment column count does not match the matrix.
    AssignmentMismatch { expected: usize, got: usize },
    BadModel(&'static str),
    /// A worker's column solve failed.
    WorkerSolve { column: usize, source: SolveError },
    /// The matrix shape does not fit the requested mode.
    BadShape { rows: usize, cols: usize },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::ReplicationOutOfRange { r, workers } => {
                write!(f, "replication factor {r} must lie in 1..={workers}")
            }
            SimError::NoColumns => write!(f, "at least one column is required"),
            SimError::AssignmentMismatch { expected, got } => {
                write!(f, "assignment covers {got} columns, matrix needs {expected}")
            }
            SimError::BadModel(msg) => write!(f, "invalid straggler model: {msg}"),
            SimError::WorkerSolve { column, source } => {
                write!(f, "worker solve for column {column} failed: {source}")
            }
            SimError::BadShape { rows, cols } => {
                write!(f, "matrix shape {rows}x{cols} does not fit the simulation mode")
            }
        }
    }
}

impl std::error::Error for SimError {}

/// A replicated block assignment of column indices to workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub num_workers: usize,
    /// Disjoint contiguous blocks covering `0..n_columns`; one slot per
    /// worker, so trailing blocks may be empty when columns are scarce.
    pub groups: Vec<Vec<usize>>,
    /// For each block, the `r` distinct workers holding a replica.
    pub replicas: Vec<Vec<usize>>,
    pub r: usize,
}

impl Assignment {
    /// Total number of columns covered.
    pub fn n_columns(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    /// Blocks held by one worker.
    pub fn blocks_of(&self, worker: usize) -> Vec<usize> {
        self.replicas
            .iter()
            .enumerate()
            .filter(|(_, ws)| ws.contains(&worker))
            .map(|(j, _)| j)
            .collect()
    }
}

/// How stragglers are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum StragglerKind {
    /// These workers never respond.
    FixedSet(Vec<usize>),
    /// Each worker independently straggles (never responds) with probability `p`.
    BernoulliPerWorker { p: f64 },
    /// Every worker responds after `base + Exp(rate)` extra time units.
    ShiftedExponentialDelay { base: f64, rate: f64 },
}

/// Straggler model plus the seed its draws derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct StragglerModel {
    pub kind: StragglerKind,
    pub seed: u64,
}

impl StragglerModel {
    fn validate(&self) -> Result<(), SimError> {
        match &self.kind {
            StragglerKind::BernoulliPerWorker { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(SimError::BadModel("probability must lie in [0, 1]"));
                }
            }
            StragglerKind::ShiftedExponentialDelay { base, rate } => {
                if *base < 0.0 {
                    return Err(SimError::BadModel("base delay must be nonnegative"));
                }
                if !(*rate > 0.0) {
                    return Err(SimError::BadModel("rate must be positive"));
                }
            }
            StragglerKind::FixedSet(_) => {}
        }
        Ok(())
    }

    /// Per-worker fate, drawn independently of enumeration order:
    /// `None` means the worker never finishes, `Some(d)` adds delay `d`.
    fn worker_delay(&self, worker: usize) -> Option<f64> {
        match &self.kind {
            StragglerKind::FixedSet(ids) => {
                if ids.contains(&worker) {
                    None
                } else {
                    Some(0.0)
                }
            }
            StragglerKind::BernoulliPerWorker { p } => {
                let mut rng = derive_rng(self.seed, worker as u64, 0);
                let u = ((rng.next_u64() >> 11) as f64) * (1.0 / 9_007_199_254_740_992.0);
                if u < *p {
                    None
                } else {
                    Some(0.0)
                }
            }
            StragglerKind::ShiftedExponentialDelay { base, rate } => {
                let mut rng = derive_rng(self.seed, worker as u64, 0);
                let u = (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0);
                Some(base - u.ln() / rate)
            }
        }
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// The decoded estimate; unrecovered columns are zero-filled.
    pub recovered: InverseEstimate,
    /// Simulated time until the last block became decodable (over recovered
    /// blocks only when the run is partial).
    pub completion_time: f64,
    /// Per worker: `(columns sent, scalars transmitted)`. Stragglers send
    /// nothing.
    pub per_worker_load: Vec<(usize, usize)>,
    /// Per worker: number of block sends if responses go out one block at a
    /// time instead of batched (same total load, more instances).
    pub per_worker_block_sends: Vec<usize>,
    /// Workers that never responded.
    pub stragglers_observed: Vec<usize>,
    /// True when every block had at least one finished replica.
    pub decode_ok: bool,
    /// Column indices left zero-filled.
    pub unrecovered_columns: Vec<usize>,
}

/// Splits `0..n_columns` into `num_workers` contiguous blocks with sizes
/// differing by at most one, and assigns block `j` to workers
/// `{j, j+1, ..., j+r-1} mod num_workers`.
///
/// Deterministic given its inputs; `seed` is reserved for randomized schemes
/// and unused by the cyclic layout.
pub fn make_assignment(
    n_columns: usize,
    num_workers: usize,
    r: usize,
    _seed: u64,
) -> Result<Assignment, SimError> {
    if n_columns == 0 {
        return Err(SimError::NoColumns);
    }
    if r == 0 || r > num_workers {
        return Err(SimError::ReplicationOutOfRange { r, workers: num_workers });
    }
    let base = n_columns / num_workers;
    let extra = n_columns % num_workers;
    let mut groups = Vec::with_capacity(num_workers);
    let mut next = 0usize;
    for j in 0..num_workers {
        let size = base + usize::from(j < extra);
        groups.push((next..next + size).collect::<Vec<_>>());
        next += size;
    }
    let replicas = (0..num_workers)
        .map(|j| (0..r).map(|k| (j + k) % num_workers).collect())
        .collect();
    Ok(Assignment {
        num_workers,
        groups,
        replicas,
        r,
    })
}

/// Runs the distributed estimation under the given assignment and straggler
/// model.
///
/// Workers execute the same deterministic solves as the sequential engine, so
/// whenever `decode_ok` holds the recovered matrix is bit-identical to the
/// engine's output for the same matrix and config.
pub fn simulate(
    a: &DenseMatrix,
    cfg: &SolverConfig,
    asg: &Assignment,
    sm: &StragglerModel,
    mode: EstimateMode,
) -> Result<SimReport, SimError> {
    let (n_targets, target_len) = mode_dims(a, mode)?;
    if asg.n_columns() != n_targets {
        return Err(SimError::AssignmentMismatch {
            expected: n_targets,
            got: asg.n_columns(),
        });
    }
    sm.validate()?;

    // Solve each column once; replicas reuse the same outcome, which is what
    // a re-run would produce anyway.
    let outcomes = solve_all(a, cfg, n_targets, mode)?;
    Ok(decode(a, asg, sm, mode, target_len, &outcomes))
}

fn mode_dims(a: &DenseMatrix, mode: EstimateMode) -> Result<(usize, usize), SimError> {
    match mode {
        EstimateMode::Inverse => {
            if !a.is_square() {
                return Err(SimError::BadShape {
                    rows: a.rows(),
                    cols: a.cols(),
                });
            }
            Ok((a.cols(), a.rows()))
        }
        EstimateMode::Pseudoinverse => {
            if a.rows() <= a.cols() {
                return Err(SimError::BadShape {
                    rows: a.rows(),
                    cols: a.cols(),
                });
            }
            Ok((a.cols(), a.rows()))
        }
    }
}

fn solve_all(
    a: &DenseMatrix,
    cfg: &SolverConfig,
    _n_targets: usize,
    mode: EstimateMode,
) -> Result<Vec<SolveOutcome>, SimError> {
    let solved = match mode {
        EstimateMode::Inverse => solve_inverse_outcomes(a, cfg),
        EstimateMode::Pseudoinverse => {
            let gram = a.gram();
            solve_pinv_outcomes(a, &gram, cfg)
        }
    };
    solved.map_err(|e| match e {
        EngineError::ColumnSolve { index, source } => SimError::WorkerSolve {
            column: index,
            source,
        },
        other => SimError::WorkerSolve {
            column: 0,
            source: SolveError::InvalidConfig(match other {
                EngineError::NotSquare { .. } => "matrix must be square",
                _ => "engine rejected the input",
            }),
        },
    })
}

fn decode(
    a: &DenseMatrix,
    asg: &Assignment,
    sm: &StragglerModel,
    mode: EstimateMode,
    target_len: usize,
    outcomes: &[SolveOutcome],
) -> SimReport {
    let n_targets = outcomes.len();

    // Worker finish times: iteration work for all assigned columns plus the
    // sampled delay; None marks a straggler that never responds.
    let mut finish = Vec::with_capacity(asg.num_workers);
    let mut stragglers = Vec::new();
    for w in 0..asg.num_workers {
        match sm.worker_delay(w) {
            None => {
                stragglers.push(w);
                finish.push(None);
            }
            Some(delay) => {
                let work: usize = asg
                    .blocks_of(w)
                    .iter()
                    .flat_map(|&j| asg.groups[j].iter())
                    .map(|&col| outcomes[col].iterations)
                    .sum();
                finish.push(Some(work as f64 + delay));
            }
        }
    }

    // Earliest finished replica per block; ties go to the lowest worker id.
    let mut matrix = match mode {
        EstimateMode::Inverse => DenseMatrix::zeros(target_len, n_targets),
        EstimateMode::Pseudoinverse => DenseMatrix::zeros(n_targets, target_len),
    };
    let mut per_column: Vec<SolveOutcome> = (0..n_targets)
        .map(|_| SolveOutcome {
            solution: Vector::zeros(target_len),
            iterations: 0,
            final_criterion_value: f64::INFINITY,
            termination: Termination::MaxItersReached,
        })
        .collect();
    let mut unrecovered = Vec::new();
    let mut completion: f64 = 0.0;
    let mut decode_ok = true;
    for (j, block) in asg.groups.iter().enumerate() {
        let best = asg.replicas[j]
            .iter()
            .filter_map(|&w| finish[w].map(|t| (t, w)))
            .min_by(|(t1, w1), (t2, w2)| t1.total_cmp(t2).then(w1.cmp(w2)));
        match best {
            Some((t, _)) => {
                if !block.is_empty() {
                    completion = completion.max(t);
                }
                for &col in block {
                    match mode {
                        EstimateMode::Inverse => matrix.set_column(col, &outcomes[col].solution),
                        EstimateMode::Pseudoinverse => matrix.set_row(col, &outcomes[col].solution),
                    }
                    per_column[col] = outcomes[col].clone();
                }
            }
            None => {
                if !block.is_empty() {
                    decode_ok = false;
                    unrecovered.extend(block.iter().copied());
                }
            }
        }
    }

    // One batched send per finished worker; the sequential variant sends each
    // nonempty block separately.
    let mut per_worker_load = Vec::with_capacity(asg.num_workers);
    let mut per_worker_block_sends = Vec::with_capacity(asg.num_workers);
    for w in 0..asg.num_workers {
        if finish[w].is_none() {
            per_worker_load.push((0, 0));
            per_worker_block_sends.push(0);
            continue;
        }
        let blocks = asg.blocks_of(w);
        let cols: usize = blocks.iter().map(|&j| asg.groups[j].len()).sum();
        per_worker_load.push((cols, cols * target_len));
        per_worker_block_sends.push(blocks.iter().filter(|&&j| !asg.groups[j].is_empty()).count());
    }

    let _ = a;
    SimReport {
        recovered: InverseEstimate {
            matrix,
            per_column,
            scale_d: 1.0,
        },
        completion_time: completion,
        per_worker_load,
        per_worker_block_sends,
        stragglers_observed: stragglers,
        decode_ok,
        unrecovered_columns: unrecovered,
    }
}

/// One row of a straggler-tolerance sweep: a single simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub r: usize,
    pub seed: u64,
    pub decode_ok: bool,
    pub completion_time: f64,
    /// Total scalars transmitted by all finished workers.
    pub total_load: usize,
}

/// Aggregate over the trials of one replication factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub r: usize,
    pub trials: usize,
    pub recovery_rate: f64,
    /// Mean completion time over decoded trials; NaN when none decoded.
    pub mean_completion_time: f64,
    pub mean_total_load: f64,
}

/// Runs `simulate` across replication factors and per-trial straggler draws.
///
/// The column solves do not depend on `r` or on the straggler draw, so they
/// run once and every simulated run decodes from the same outcomes.
pub fn sweep_straggler_tolerance(
    a: &DenseMatrix,
    cfg: &SolverConfig,
    workers: usize,
    r_values: &[usize],
    sm: &StragglerModel,
    trials: usize,
    mode: EstimateMode,
) -> Result<(Vec<SweepRecord>, Vec<SweepSummary>), SimError> {
    let (n_targets, target_len) = mode_dims(a, mode)?;
    sm.validate()?;
    let outcomes = solve_all(a, cfg, n_targets, mode)?;

    let mut records = Vec::with_capacity(r_values.len() * trials);
    let mut summaries = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let asg = make_assignment(n_targets, workers, r, 0)?;
        let mut decoded = 0usize;
        let mut time_sum = 0.0;
        let mut load_sum = 0usize;
        for trial in 0..trials {
            let trial_seed = sm.seed.wrapping_add(trial as u64);
            let sm_trial = StragglerModel {
                kind: sm.kind.clone(),
                seed: trial_seed,
            };
            let report = decode(a, &asg, &sm_trial, mode, target_len, &outcomes);
            let total_load: usize = report.per_worker_load.iter().map(|(_, s)| s).sum();
            if report.decode_ok {
                decoded += 1;
                time_sum += report.completion_time;
            }
            load_sum += total_load;
            records.push(SweepRecord {
                r,
                seed: trial_seed,
                decode_ok: report.decode_ok,
                completion_time: report.completion_time,
                total_load,
            });
        }
        summaries.push(SweepSummary {
            r,
            trials,
            recovery_rate: decoded as f64 / trials as f64,
            mean_completion_time: if decoded > 0 {
                time_sum / decoded as f64
            } else {
                f64::NAN
            },
            mean_total_load: load_sum as f64 / trials as f64,
        });
    }
    Ok((records, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{SolverConfig, SolverMethod};

    fn sd(eps: f64, dim: usize) -> SolverConfig {
        SolverConfig::new(SolverMethod::Sd, eps, dim)
    }

    #[test]
    fn one_column_per_worker_layout() {
        let asg = make_assignment(4, 4, 1, 0).unwrap();
        assert_eq!(asg.groups.len(), 4);
        for (j, g) in asg.groups.iter().enumerate() {
            assert_eq!(g, &vec![j]);
            assert_eq!(asg.replicas[j], vec![j]);
        }
    }

    #[test]
    fn cyclic_layout_ten_columns_five_workers() {
        let asg = make_assignment(10, 5, 2, 0).unwrap();
        for (j, g) in asg.groups.iter().enumerate() {
            assert_eq!(g.len(), 2);
            assert_eq!(asg.replicas[j], vec![j, (j + 1) % 5]);
        }
        // Every worker holds exactly two blocks.
        for w in 0..5 {
            assert_eq!(asg.blocks_of(w).len(), 2);
        }
    }

    #[test]
    fn replication_factor_out_of_range() {
        assert!(matches!(
            make_assignment(10, 4, 5, 0),
            Err(SimError::ReplicationOutOfRange { .. })
        ));
        assert!(matches!(
            make_assignment(10, 4, 0, 0),
            Err(SimError::ReplicationOutOfRange { .. })
        ));
    }

    #[test]
    fn no_stragglers_identity_recovers() {
        let a = DenseMatrix::identity(4);
        let asg = make_assignment(4, 4, 1, 0).unwrap();
        let sm = StragglerModel {
            kind: StragglerKind::FixedSet(vec![]),
            seed: 0,
        };
        let report = simulate(&a, &sd(1e-10, 4), &asg, &sm, EstimateMode::Inverse).unwrap();
        assert!(report.decode_ok);
        assert!(report.stragglers_observed.is_empty());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((report.recovered.matrix.get(i, j) - want).abs() < 1e-9);
            }
        }
        // Every worker sends its one column of length 4.
        assert!(report.per_worker_load.iter().all(|&(c, s)| c == 1 && s == 4));
    }

    #[test]
    fn adjacent_stragglers_kill_exactly_their_shared_block() {
        // r = 2 cyclic on 5 workers: block 0 lives on workers {0, 1}; both
        // straggling makes block 0 unrecoverable while the rest decode.
        let a = DenseMatrix::identity(10);
        let asg = make_assignment(10, 5, 2, 0).unwrap();
        let sm = StragglerModel {
            kind: StragglerKind::FixedSet(vec![0, 1]),
            seed: 0,
        };
        let report = simulate(&a, &sd(1e-10, 10), &asg, &sm, EstimateMode::Inverse).unwrap();
        assert!(!report.decode_ok);
        assert_eq!(report.unrecovered_columns, asg.groups[0]);
        // Unrecovered columns are zero-filled.
        for &col in &report.unrecovered_columns {
            for i in 0..10 {
                assert_eq!(report.recovered.matrix.get(i, col), 0.0);
            }
        }
        // A block held by a live worker still decodes.
        let live_col = asg.groups[2][0];
        assert_eq!(report.recovered.matrix.get(live_col, live_col), 1.0);
    }

    #[test]
    fn single_straggler_with_replication_decodes_identically() {
        let a = DenseMatrix::from_rows(&[
            &[3.0, 0.5, 0.0, 0.1],
            &[0.5, 2.0, 0.3, 0.0],
            &[0.0, 0.3, 4.0, 0.2],
            &[0.1, 0.0, 0.2, 1.5],
        ]);
        let cfg = sd(1e-9, 4);
        let asg = make_assignment(4, 4, 2, 0).unwrap();
        let sm = StragglerModel {
            kind: StragglerKind::FixedSet(vec![0]),
            seed: 0,
        };
        let report = simulate(&a, &cfg, &asg, &sm, EstimateMode::Inverse).unwrap();
        assert!(report.decode_ok);
        let sequential = crate::engine::estimate_inverse(&a, &cfg).unwrap();
        assert_eq!(report.recovered.matrix, sequential.matrix);
        assert_eq!(report.stragglers_observed, vec![0]);
    }

    #[test]
    fn exponential_delay_model_always_decodes() {
        let a = DenseMatrix::identity(6);
        let asg = make_assignment(6, 3, 1, 0).unwrap();
        let sm = StragglerModel {
            kind: StragglerKind::ShiftedExponentialDelay { base: 2.0, rate: 0.5 },
            seed: 11,
        };
        let report = simulate(&a, &sd(1e-10, 6), &asg, &sm, EstimateMode::Inverse).unwrap();
        assert!(report.decode_ok);
        assert!(report.completion_time >= 2.0);
        // Same seed reproduces the same report.
        let again = simulate(&a, &sd(1e-10, 6), &asg, &sm, EstimateMode::Inverse).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn model_validation_rejects_bad_parameters() {
        let sm = StragglerModel {
            kind: StragglerKind::BernoulliPerWorker { p: 1.5 },
            seed: 0,
        };
        let a = DenseMatrix::identity(2);
        let asg = make_assignment(2, 2, 1, 0).unwrap();
        assert!(matches!(
            simulate(&a, &sd(1e-8, 2), &asg, &sm, EstimateMode::Inverse),
            Err(SimError::BadModel(_))
        ));
    }

    #[test]
    fn full_replication_tolerates_any_minority_straggler_set() {
        let a = DenseMatrix::identity(5);
        let cfg = sd(1e-10, 5);
        let asg = make_assignment(5, 5, 5, 0).unwrap();
        let sm = StragglerModel {
            kind: StragglerKind::FixedSet(vec![0, 1, 2, 3]),
            seed: 0,
        };
        let report = simulate(&a, &cfg, &asg, &sm, EstimateMode::Inverse).unwrap();
        assert!(report.decode_ok);
    }

    #[test]
    fn sweep_load_grows_linearly_in_r() {
        let a = DenseMatrix::identity(8);
        let cfg = sd(1e-9, 8);
        let sm = StragglerModel {
            kind: StragglerKind::FixedSet(vec![]),
            seed: 0,
        };
        let (_, summaries) =
            sweep_straggler_tolerance(&a, &cfg, 4, &[1, 2, 3, 4], &sm, 3, EstimateMode::Inverse)
                .unwrap();
        // With nobody straggling, total scalars = r * 8 columns * 8 rows.
        for s in &summaries {
            assert_eq!(s.mean_total_load, (s.r * 64) as f64);
            assert_eq!(s.recovery_rate, 1.0);
        }
    }
}
