//! Black-box least-squares solvers: steepest descent with backtracking line
//! search, and conjugate gradients.
//!
//! Both minimize `f(b) = ||A b - y||^2` for a fixed matrix `A`. They differ in
//! termination: SD stops when the gradient norm `||2 A^T (A b - y)||` drops to
//! the configured tolerance, CG stops when the iterate displacement
//! `||b_k - b_{k-1}||` does.
//!
//! SD exploits that `f` is an exact quadratic: with `H = 2 A^T A` and
//! `y' = 2 A^T y`, the gradient is `H b - y'` and every backtracking trial
//! step evaluates `f` in O(1) from `||g||^2` and `g^T H g`. One matrix-vector
//! product per accepted step, with a periodic refresh against `A` itself to
//! shed accumulated drift. The iterates are identical to a textbook
//! implementation up to roundoff, and bit-reproducible run to run.
//!
//! CG comes in two shapes: plain CG on `A b = y` when `A` is symmetric (or the
//! caller asserts positive definiteness), and CGNR on the normal equations
//! `A^T A b = A^T y` for everything else.

use crate::matrix::{dot, DenseMatrix, MatrixError, Vector};
use std::fmt;

/// Which least-squares subroutine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Sd,
    Cg,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverMethod::Sd => write!(f, "sd"),
            SolverMethod::Cg => write!(f, "cg"),
        }
    }
}

/// How the initial iterate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitRule {
    /// Start from the zero vector (the default; reproducible baselines).
    ZeroVector,
    /// Start from a caller-provided vector, passed via `*_with_init`.
    GivenVector,
}

/// Solver configuration shared by SD and CG.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Termination tolerance: gradient norm for SD, iterate displacement for CG.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant, in (0, 0.5).
    pub ls_alpha: f64,
    /// Backtracking shrink factor, in (0, 1).
    pub ls_beta: f64,
    /// Initial trial step for each line search.
    pub t_init: f64,
    pub init_rule: InitRule,
    /// Caller-asserted positive definiteness: CG then runs directly on
    /// `A b = y` and treats non-positive curvature as a breakdown.
    pub assume_spd: bool,
}

impl SolverConfig {
    /// Mid-range defaults with `max_iters = 50 * dim`.
    pub fn new(method: SolverMethod, epsilon: f64, dim: usize) -> Self {
        Self {
            method,
            epsilon,
            max_iters: 50 * dim.max(1),
            ls_alpha: 0.25,
            ls_beta: 0.5,
            t_init: 1.0,
            init_rule: InitRule::ZeroVector,
            assume_spd: false,
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.epsilon > 0.0) {
            return Err(SolveError::InvalidConfig("epsilon must be positive"));
        }
        if self.max_iters == 0 {
            return Err(SolveError::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.ls_alpha > 0.0 && self.ls_alpha < 0.5) {
            return Err(SolveError::InvalidConfig("ls_alpha must lie in (0, 0.5)"));
        }
        if !(self.ls_beta > 0.0 && self.ls_beta < 1.0) {
            return Err(SolveError::InvalidConfig("ls_beta must lie in (0, 1)"));
        }
        if !(self.t_init > 0.0) {
            return Err(SolveError::InvalidConfig("t_init must be positive"));
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    MaxItersReached,
}

/// Result of one column/row solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Vector,
    pub iterations: usize,
    /// Last value of the termination criterion (gradient norm for SD,
    /// displacement for CG). At most `epsilon` when `termination` is
    /// `ToleranceMet`.
    pub final_criterion_value: f64,
    pub termination: Termination,
}

/// Error type for the least-squares solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Dimension(MatrixError),
    /// A non-finite objective or gradient appeared at the given iteration.
    Diverged { iteration: usize },
    /// CG curvature `p^T M p` vanished (or went negative under an SPD
    /// assertion) at the given iteration.
    NumericalBreakdown { iteration: usize },
    InvalidConfig(&'static str),
    /// `init_rule` was `GivenVector` but no vector was supplied, or the
    /// supplied one has the wrong length.
    BadInit,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Dimension(e) => write!(f, "{e}"),
            SolveError::Diverged { iteration } => {
                write!(f, "solver diverged at iteration {iteration}: non-finite value")
            }
            SolveError::NumericalBreakdown { iteration } => {
                write!(f, "numerical breakdown at iteration {iteration}: curvature not positive")
            }
            SolveError::InvalidConfig(msg) => write!(f, "invalid solver config: {msg}"),
            SolveError::BadInit => write!(f, "initial iterate missing or wrong length"),
        }
    }
}

impl std::error::Error for SolveError {}

/// The objective `||A b - y||^2`.
pub fn least_squares_objective(a: &DenseMatrix, b: &Vector, y: &Vector) -> f64 {
    let r = a.matvec(b).expect("objective: dimension mismatch");
    r.sub(y).norm_sq()
}

/// The gradient `2 A^T (A b - y)` of [`least_squares_objective`].
pub fn least_squares_gradient(a: &DenseMatrix, b: &Vector, y: &Vector) -> Vector {
    let r = a.matvec(b).expect("gradient: dimension mismatch").sub(y);
    a.matvec_transposed(&r)
        .expect("gradient: dimension mismatch")
        .scale(2.0)
}

/// Routes to [`sd_least_squares`] or [`cg_least_squares`] on `cfg.method`.
pub fn solve_least_squares(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    match cfg.method {
        SolverMethod::Sd => sd_least_squares(a, y, cfg),
        SolverMethod::Cg => cg_least_squares(a, y, cfg),
    }
}

fn check_dims(a: &DenseMatrix, y: &Vector) -> Result<(), SolveError> {
    if y.len() != a.rows() {
        return Err(SolveError::Dimension(MatrixError::DimensionMismatch {
            expected: (a.rows(), 1),
            got: (y.len(), 1),
        }));
    }
    Ok(())
}

fn initial_iterate(
    m: usize,
    cfg: &SolverConfig,
    given: Option<&Vector>,
) -> Result<Vec<f64>, SolveError> {
    match cfg.init_rule {
        InitRule::ZeroVector => Ok(vec![0.0; m]),
        InitRule::GivenVector => match given {
            Some(v) if v.len() == m => Ok(v.as_slice().to_vec()),
            _ => Err(SolveError::BadInit),
        },
    }
}

// ---------------------------------------------------------------------------
// Steepest descent
// ---------------------------------------------------------------------------

/// Recompute residual, objective and gradient directly from `A` every this
/// many accepted steps, flushing drift from the incremental updates.
const SD_REFRESH_PERIOD: usize = 64;

/// Steepest descent with backtracking line search on `||A b - y||^2`.
///
/// Steps `b <- b - t g` with `g = 2 A^T (A b - y)`; the trial step starts at
/// `t_init` and shrinks by `ls_beta` until the Armijo condition
/// `f(b - t g) <= f(b) - ls_alpha * t * ||g||^2` holds. Stops with
/// `ToleranceMet` once `||g|| <= epsilon`, or `MaxItersReached` with the
/// current (monotonically best) iterate.
pub fn sd_least_squares(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    if cfg.method != SolverMethod::Sd {
        return Err(SolveError::InvalidConfig("sd_least_squares requires method = Sd"));
    }
    check_dims(a, y)?;
    let mut out = sd_batch(a, &[SdProblem { y, init: None }], cfg).map_err(|(_, e)| e)?;
    Ok(out.pop().expect("one problem in, one outcome out"))
}

/// [`sd_least_squares`] with a caller-provided initial iterate
/// (`init_rule` must be `GivenVector`).
pub fn sd_least_squares_with_init(
    a: &DenseMatrix,
    y: &Vector,
    init: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    check_dims(a, y)?;
    let mut out = sd_batch(a, &[SdProblem { y, init: Some(init) }], cfg).map_err(|(_, e)| e)?;
    Ok(out.pop().expect("one problem in, one outcome out"))
}

/// One right-hand side of a shared-matrix SD batch.
pub(crate) struct SdProblem<'a> {
    pub y: &'a Vector,
    pub init: Option<&'a Vector>,
}

/// Per-column state of an in-flight SD solve.
struct SdState {
    b: Vec<f64>,
    g: Vec<f64>,
    q: Vec<f64>,
    f: f64,
    iterations: usize,
    done: Option<SolveOutcome>,
}

/// Runs independent SD solves against one shared matrix in lockstep.
///
/// Every column performs exactly the floating-point operations of a solo
/// solve — the batching only interleaves them so each row of the Hessian
/// `H = 2 A^T A` is streamed once per sweep instead of once per column.
/// Outcomes are therefore bit-identical to calling [`sd_least_squares`] per
/// column. Errors carry the index of the offending problem.
pub(crate) fn sd_batch(
    a: &DenseMatrix,
    problems: &[SdProblem<'_>],
    cfg: &SolverConfig,
) -> Result<Vec<SolveOutcome>, (usize, SolveError)> {
    cfg.validate().map_err(|e| (0, e))?;
    let m = a.cols();
    for (c, p) in problems.iter().enumerate() {
        check_dims(a, p.y).map_err(|e| (c, e))?;
    }
    // Shared quadratic form: f(b) = ||A b - y||^2 has Hessian H = 2 A^T A;
    // the gradient 2 A^T (A b - y) follows the recurrence g - t H g.
    let h = a.gram().scale(2.0);

    let refresh = |c: usize, b: &[f64], g: &mut [f64], f: &mut f64| {
        let bv = Vector::from_raw(b.to_vec());
        let r = a.matvec(&bv).expect("checked dims").sub(problems[c].y);
        *f = r.norm_sq();
        let grad = a.matvec_transposed(&r).expect("checked dims").scale(2.0);
        g.copy_from_slice(grad.as_slice());
    };

    let mut states = Vec::with_capacity(problems.len());
    for (c, p) in problems.iter().enumerate() {
        let b = initial_iterate(m, cfg, p.init).map_err(|e| (c, e))?;
        let mut g = vec![0.0; m];
        let mut f = 0.0;
        refresh(c, &b, &mut g, &mut f);
        states.push(SdState {
            b,
            g,
            q: vec![0.0; m],
            f,
            iterations: 0,
            done: None,
        });
    }

    let mut active: Vec<usize> = (0..states.len()).collect();
    while !active.is_empty() {
        // Termination checks first, in column order.
        let mut still = Vec::with_capacity(active.len());
        for &c in &active {
            let s = &mut states[c];
            let gg = dot(&s.g, &s.g);
            if !gg.is_finite() || !s.f.is_finite() {
                return Err((c, SolveError::Diverged { iteration: s.iterations }));
            }
            let gn = gg.sqrt();
            if gn <= cfg.epsilon || s.iterations >= cfg.max_iters {
                s.done = Some(SolveOutcome {
                    solution: Vector::from_raw(std::mem::take(&mut s.b)),
                    iterations: s.iterations,
                    final_criterion_value: gn,
                    termination: if gn <= cfg.epsilon {
                        Termination::ToleranceMet
                    } else {
                        Termination::MaxItersReached
                    },
                });
            } else {
                still.push(c);
            }
        }
        active = still;
        if active.is_empty() {
            break;
        }

        // q = H g for every active column, one pass over H's rows.
        for i in 0..m {
            let row = h.row(i);
            for &c in &active {
                let s = &mut states[c];
                s.q[i] = dot(row, &s.g);
            }
        }

        // Line search and updates, independent per column. Along b - t g the
        // objective is exactly f - t ||g||^2 + (t^2 / 2) g^T q.
        for &c in &active {
            let s = &mut states[c];
            let gg = dot(&s.g, &s.g);
            let gq = dot(&s.g, &s.q);
            s.iterations += 1;

            let mut t = cfg.t_init;
            let mut stalled = false;
            let mut f_try;
            loop {
                f_try = s.f - t * gg + 0.5 * t * t * gq;
                if f_try <= s.f - cfg.ls_alpha * t * gg {
                    break;
                }
                t *= cfg.ls_beta;
                if t == 0.0 {
                    // Underflowed without an acceptable step: the objective
                    // is at its numerical floor. Report the iterate as-is.
                    stalled = true;
                    break;
                }
            }
            if stalled {
                let gn = gg.sqrt();
                s.done = Some(SolveOutcome {
                    solution: Vector::from_raw(std::mem::take(&mut s.b)),
                    iterations: s.iterations,
                    final_criterion_value: gn,
                    termination: Termination::MaxItersReached,
                });
                continue;
            }

            for i in 0..m {
                s.b[i] -= t * s.g[i];
                s.g[i] -= t * s.q[i];
            }
            s.f = f_try;
            if s.iterations % SD_REFRESH_PERIOD == 0 {
                let SdState { b, g, f, .. } = s;
                refresh(c, b, g, f);
            }
        }
        active.retain(|&c| states[c].done.is_none());
    }

    Ok(states
        .into_iter()
        .map(|s| s.done.expect("all columns resolved"))
        .collect())
}

// ---------------------------------------------------------------------------
// Conjugate gradients
// ---------------------------------------------------------------------------

/// Conjugate gradients for `||A b - y||^2`, stopping when the iterate
/// displacement `||b_k - b_{k-1}||` drops to `epsilon`.
///
/// Runs plain CG on `A b = y` when `A` is square and exactly symmetric (or
/// `cfg.assume_spd` asserts definiteness); otherwise CGNR on the normal
/// equations. Under an SPD assertion, non-positive curvature is a breakdown;
/// for a merely-symmetric system only exactly-zero curvature is.
pub fn cg_least_squares(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    if cfg.method != SolverMethod::Cg {
        return Err(SolveError::InvalidConfig("cg_least_squares requires method = Cg"));
    }
    check_dims(a, y)?;
    cg_core(a, y, cfg, None)
}

/// [`cg_least_squares`] with a caller-provided initial iterate.
pub fn cg_least_squares_with_init(
    a: &DenseMatrix,
    y: &Vector,
    init: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    check_dims(a, y)?;
    cg_core(a, y, cfg, Some(init))
}

fn cg_core(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
    given: Option<&Vector>,
) -> Result<SolveOutcome, SolveError> {
    if cfg.assume_spd || (a.is_square() && a.is_symmetric()) {
        cg_symmetric(a, y, cfg, given)
    } else {
        cg_normal_equations(a, y, cfg, given)
    }
}

fn cg_symmetric(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
    given: Option<&Vector>,
) -> Result<SolveOutcome, SolveError> {
    let n = a.rows();
    let mut b = initial_iterate(n, cfg, given)?;

    let mut r: Vec<f64> = {
        let bv = Vector::from_raw(b.clone());
        let ab = a.matvec(&bv).expect("checked dims");
        y.as_slice().iter().zip(ab.as_slice()).map(|(yi, abi)| yi - abi).collect()
    };
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut w = vec![0.0; n];
    let mut iterations = 0usize;
    let mut last_disp = f64::INFINITY;

    loop {
        if rr == 0.0 {
            // Residual vanished: exact solution reached, displacement is zero.
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: 0.0,
                termination: Termination::ToleranceMet,
            });
        }
        if iterations >= cfg.max_iters {
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: last_disp,
                termination: Termination::MaxItersReached,
            });
        }
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = dot(a.row(i), &p);
        }
        let pw = dot(&p, &w);
        if pw == 0.0 || (cfg.assume_spd && pw < 0.0) || !pw.is_finite() {
            return Err(SolveError::NumericalBreakdown { iteration: iterations + 1 });
        }
        let alpha = rr / pw;
        for i in 0..n {
            b[i] += alpha * p[i];
        }
        iterations += 1;
        let disp = alpha.abs() * dot(&p, &p).sqrt();
        last_disp = disp;
        if !disp.is_finite() {
            return Err(SolveError::Diverged { iteration: iterations });
        }
        if disp <= cfg.epsilon {
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: disp,
                termination: Termination::ToleranceMet,
            });
        }
        for i in 0..n {
            r[i] -= alpha * w[i];
        }
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(SolveError::Diverged { iteration: iterations });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
}

fn cg_normal_equations(
    a: &DenseMatrix,
    y: &Vector,
    cfg: &SolverConfig,
    given: Option<&Vector>,
) -> Result<SolveOutcome, SolveError> {
    let m = a.cols();
    let mut b = initial_iterate(m, cfg, given)?;

    // Residual in data space and in normal-equation space.
    let mut r: Vec<f64> = {
        let bv = Vector::from_raw(b.clone());
        let ab = a.matvec(&bv).expect("checked dims");
        y.as_slice().iter().zip(ab.as_slice()).map(|(yi, abi)| yi - abi).collect()
    };
    let mut z = vec![0.0; m];
    let at_apply = |r: &[f64], z: &mut [f64]| {
        z.iter_mut().for_each(|v| *v = 0.0);
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for (zj, aij) in z.iter_mut().zip(a.row(i)) {
                *zj += ri * aij;
            }
        }
    };
    at_apply(&r, &mut z);
    let mut p = z.clone();
    let mut zz = dot(&z, &z);
    let mut w = vec![0.0; a.rows()];
    let mut iterations = 0usize;
    let mut last_disp = f64::INFINITY;

    loop {
        if zz == 0.0 {
            // Normal-equation residual vanished: least-squares optimum.
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: 0.0,
                termination: Termination::ToleranceMet,
            });
        }
        if iterations >= cfg.max_iters {
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: last_disp,
                termination: Termination::MaxItersReached,
            });
        }
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = dot(a.row(i), &p);
        }
        let ww = dot(&w, &w);
        if ww == 0.0 || !ww.is_finite() {
            // p^T (A^T A) p = ||A p||^2 vanished: rank deficiency.
            return Err(SolveError::NumericalBreakdown { iteration: iterations + 1 });
        }
        let alpha = zz / ww;
        for i in 0..m {
            b[i] += alpha * p[i];
        }
        iterations += 1;
        let disp = alpha.abs() * dot(&p, &p).sqrt();
        last_disp = disp;
        if !disp.is_finite() {
            return Err(SolveError::Diverged { iteration: iterations });
        }
        if disp <= cfg.epsilon {
            return Ok(SolveOutcome {
                solution: Vector::from_raw(b),
                iterations,
                final_criterion_value: disp,
                termination: Termination::ToleranceMet,
            });
        }
        for i in 0..r.len() {
            r[i] -= alpha * w[i];
        }
        at_apply(&r, &mut z);
        let zz_next = dot(&z, &z);
        if !zz_next.is_finite() {
            return Err(SolveError::Diverged { iteration: iterations });
        }
        let beta = zz_next / zz;
        zz = zz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sd_cfg(eps: f64, dim: usize) -> SolverConfig {
        SolverConfig::new(SolverMethod::Sd, eps, dim)
    }

    fn cg_cfg(eps: f64, dim: usize) -> SolverConfig {
        SolverConfig::new(SolverMethod::Cg, eps, dim)
    }

    #[test]
    fn sd_identity_solves_exactly() {
        let a = DenseMatrix::identity(2);
        let y = Vector::new(vec![1.0, 0.0]).unwrap();
        let out = sd_least_squares(&a, &y, &sd_cfg(1e-10, 2)).unwrap();
        assert_eq!(out.termination, Termination::ToleranceMet);
        assert!((out.solution[0] - 1.0).abs() <= 1e-10);
        assert!(out.solution[1].abs() <= 1e-10);
        assert!(out.final_criterion_value <= 1e-10);
    }

    #[test]
    fn sd_diagonal_closed_form() {
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let y = Vector::new(vec![1.0, 1.0]).unwrap();
        let eps = 1e-9;
        let out = sd_least_squares(&a, &y, &sd_cfg(eps, 2)).unwrap();
        assert_eq!(out.termination, Termination::ToleranceMet);
        // kappa = 2; allow the gradient tolerance scaled by the conditioning.
        let tol = eps * 2.0;
        assert!((out.solution[0] - 0.5).abs() <= tol);
        assert!((out.solution[1] - 1.0).abs() <= tol);
    }

    #[test]
    fn sd_max_iters_reports_best_iterate() {
        let a = DenseMatrix::from_rows(&[&[5.0, 1.0], &[1.0, 3.0]]);
        let y = Vector::new(vec![1.0, 2.0]).unwrap();
        let mut cfg = sd_cfg(1e-14, 2);
        cfg.max_iters = 3;
        let out = sd_least_squares(&a, &y, &cfg).unwrap();
        assert_eq!(out.termination, Termination::MaxItersReached);
        assert_eq!(out.iterations, 3);
        assert!(out.final_criterion_value > 1e-14);
    }

    #[test]
    fn sd_rejects_mismatched_dims_and_bad_config() {
        let a = DenseMatrix::identity(3);
        let y = Vector::zeros(2);
        assert!(matches!(
            sd_least_squares(&a, &y, &sd_cfg(1e-8, 3)),
            Err(SolveError::Dimension(_))
        ));
        let mut cfg = sd_cfg(1e-8, 3);
        cfg.ls_alpha = 0.7;
        let y3 = Vector::zeros(3);
        assert!(matches!(
            sd_least_squares(&a, &y3, &cfg),
            Err(SolveError::InvalidConfig(_))
        ));
    }

    #[test]
    fn cg_identity_one_iteration() {
        let a = DenseMatrix::identity(3);
        let y = Vector::basis(3, 1);
        let out = cg_least_squares(&a, &y, &cg_cfg(1e-12, 3)).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.termination, Termination::ToleranceMet);
        assert_eq!(out.solution.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn cg_spd_two_by_two_exact_in_two_steps() {
        // Solution of [[4,1],[1,3]] x = (1,2): x = (1/11, 7/11).
        let a = DenseMatrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let y = Vector::new(vec![1.0, 2.0]).unwrap();
        let mut cfg = cg_cfg(1e-10, 2);
        cfg.assume_spd = true;
        let out = cg_least_squares(&a, &y, &cfg).unwrap();
        assert!(out.iterations <= 2 + 1);
        assert!((out.solution[0] - 1.0 / 11.0).abs() < 1e-8);
        assert!((out.solution[1] - 7.0 / 11.0).abs() < 1e-8);
    }

    #[test]
    fn cg_zero_rhs_terminates_immediately() {
        let a = DenseMatrix::identity(4);
        let y = Vector::zeros(4);
        let out = cg_least_squares(&a, &y, &cg_cfg(1e-12, 4)).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.final_criterion_value, 0.0);
        assert_eq!(out.termination, Termination::ToleranceMet);
    }

    #[test]
    fn cg_spd_assertion_catches_indefinite() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let y = Vector::new(vec![0.0, 1.0]).unwrap();
        let mut cfg = cg_cfg(1e-10, 2);
        cfg.assume_spd = true;
        assert!(matches!(
            cg_least_squares(&a, &y, &cfg),
            Err(SolveError::NumericalBreakdown { .. })
        ));
    }

    #[test]
    fn cg_symmetric_indefinite_runs_without_spd_assertion() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let y = Vector::new(vec![2.0, 1.0]).unwrap();
        let out = cg_least_squares(&a, &y, &cg_cfg(1e-12, 2)).unwrap();
        assert!((out.solution[0] - 2.0).abs() < 1e-10);
        assert!((out.solution[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn given_vector_init_is_honored() {
        let a = DenseMatrix::identity(2);
        let y = Vector::new(vec![3.0, 4.0]).unwrap();
        let mut cfg = sd_cfg(1e-12, 2);
        cfg.init_rule = InitRule::GivenVector;
        // Starting at the solution terminates with zero iterations.
        let out = sd_least_squares_with_init(&a, &y, &y, &cfg).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.termination, Termination::ToleranceMet);
        // Missing init is an error.
        assert!(matches!(
            sd_least_squares(&a, &y, &cfg),
            Err(SolveError::BadInit)
        ));
    }

    #[test]
    fn solver_outputs_are_bit_deterministic() {
        let a = DenseMatrix::from_rows(&[
            &[3.0, 1.0, 0.5],
            &[1.0, 4.0, 1.5],
            &[0.5, 1.5, 5.0],
            &[0.1, 0.2, 0.3],
        ]);
        let y = Vector::new(vec![1.0, -2.0, 0.5, 0.25]).unwrap();
        for cfg in [sd_cfg(1e-9, 3), cg_cfg(1e-9, 3)] {
            let o1 = solve_least_squares(&a, &y, &cfg).unwrap();
            let o2 = solve_least_squares(&a, &y, &cfg).unwrap();
            assert_eq!(o1, o2);
        }
    }
}
