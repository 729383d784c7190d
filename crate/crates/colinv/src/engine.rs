//! Column-wise assembly of inverse and pseudoinverse estimates.
//!
//! The inverse of a nonsingular `A` satisfies `A b_i = e_i` per column, so
//! each column is recovered independently as the least-squares minimizer of
//! `||A b - e_i||^2` and the estimates are concatenated. The left
//! pseudoinverse of a tall full-rank `A` goes through the Gram matrix:
//! solve the row problems against `B = A^T A`, then correct each solution by
//! `A^T` to land in row space.
//!
//! Column (and row) solves are independent: they run in parallel over the
//! shared immutable matrix and are assembled by index, so the result is
//! identical no matter the execution order. The same per-column entry points
//! back the straggler simulator, which keeps its decoded output bit-identical
//! to the sequential path.

use crate::matrix::{DenseMatrix, MatrixError, Vector};
use crate::solvers::{
    sd_batch, solve_least_squares, SdProblem, SolveError, SolveOutcome, SolverConfig,
    SolverMethod, Termination,
};
use crate::spectral::spectral_summary;
use rayon::prelude::*;
use std::fmt;

/// Error type for the estimation engine.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// The inverse needs a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// The left pseudoinverse needs strictly more rows than columns.
    NotTall { rows: usize, cols: usize },
    /// A column/row solve failed; the index is reported.
    ColumnSolve { index: usize, source: SolveError },
    /// Scale factor must be positive.
    InvalidScale { d: f64 },
    /// Auto-scaling found a singular matrix (`sigma_min = 0`).
    SingularForAutoScale,
    Matrix(MatrixError),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::NotSquare { rows, cols } => {
                write!(f, "inverse estimation needs a square matrix, got {rows}x{cols}")
            }
            EngineError::NotTall { rows, cols } => write!(
                f,
                "left pseudoinverse needs rows > cols, got {rows}x{cols}"
            ),
            EngineError::ColumnSolve { index, source } => {
                write!(f, "column {index} solve failed: {source}")
            }
            EngineError::InvalidScale { d } => write!(f, "scale factor must be positive, got {d}"),
            EngineError::SingularForAutoScale => {
                write!(f, "auto-scaling failed: sigma_min is zero to working precision")
            }
            EngineError::Matrix(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EngineError {}

/// Scale factor selection for [`estimate_inverse_scaled`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Fixed(f64),
    /// `d = 1 / sigma_min(A)` from a spectral summary at tolerance 1e-10.
    Auto,
}

/// Which estimate a driver targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Inverse,
    Pseudoinverse,
}

impl std::fmt::Display for EstimateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateMode::Inverse => write!(f, "inverse"),
            EstimateMode::Pseudoinverse => write!(f, "pseudoinverse"),
        }
    }
}

/// An assembled inverse or pseudoinverse estimate with per-column solve
/// records.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseEstimate {
    /// The estimate: `n x n` for an inverse, `m x n` for a left pseudoinverse.
    pub matrix: DenseMatrix,
    /// One record per estimated column (inverse) or row (pseudoinverse).
    pub per_column: Vec<SolveOutcome>,
    /// Scale factor the estimate was produced under; 1 when unscaled.
    pub scale_d: f64,
}

impl InverseEstimate {
    /// Indices whose solve stopped at the iteration cap instead of the
    /// tolerance. Approximation warnings, not errors.
    pub fn capped_indices(&self) -> Vec<usize> {
        self.per_column
            .iter()
            .enumerate()
            .filter(|(_, o)| o.termination == Termination::MaxItersReached)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total solver iterations across all columns.
    pub fn total_iterations(&self) -> usize {
        self.per_column.iter().map(|o| o.iterations).sum()
    }
}

/// Solves the single column problem `min_b ||A b - e_i||^2`.
///
/// Shared by the sequential engine and the simulated workers so both produce
/// bit-identical columns.
pub fn solve_inverse_column(
    a: &DenseMatrix,
    i: usize,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    let e_i = Vector::basis(a.rows(), i);
    solve_least_squares(a, &e_i, cfg)
}

/// SD columns solved per lockstep batch of this many; amortizes Hessian
/// streaming while leaving enough chunks for the thread pool.
const SD_CHUNK: usize = 32;

/// Solves the column problems `min ||M x - e_i||^2` for `i` in `0..count`.
///
/// SD runs in shared-matrix batches (bit-identical to per-column solves);
/// CG runs per column. Both parallelize over the column index.
fn solve_basis_targets(
    m: &DenseMatrix,
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<SolveOutcome>, EngineError> {
    match cfg.method {
        SolverMethod::Sd => {
            let chunks: Vec<(usize, usize)> = (0..count)
                .step_by(SD_CHUNK)
                .map(|start| (start, (start + SD_CHUNK).min(count)))
                .collect();
            let solved: Vec<Result<Vec<SolveOutcome>, (usize, SolveError)>> = chunks
                .par_iter()
                .map(|&(start, end)| {
                    let targets: Vec<Vector> =
                        (start..end).map(|i| Vector::basis(m.rows(), i)).collect();
                    let problems: Vec<SdProblem> = targets
                        .iter()
                        .map(|y| SdProblem { y, init: None })
                        .collect();
                    sd_batch(m, &problems, cfg)
                        .map_err(|(offset, e)| (start + offset, e))
                })
                .collect();
            let mut outcomes = Vec::with_capacity(count);
            for chunk in solved {
                outcomes.extend(chunk.map_err(|(index, source)| EngineError::ColumnSolve {
                    index,
                    source,
                })?);
            }
            Ok(outcomes)
        }
        SolverMethod::Cg => {
            let solved: Vec<Result<SolveOutcome, SolveError>> = (0..count)
                .into_par_iter()
                .map(|i| {
                    let e_i = Vector::basis(m.rows(), i);
                    solve_least_squares(m, &e_i, cfg)
                })
                .collect();
            solved
                .into_iter()
                .enumerate()
                .map(|(i, r)| r.map_err(|source| EngineError::ColumnSolve { index: i, source }))
                .collect()
        }
    }
}

/// Column solve records for the inverse of `a`, indexed by column.
pub(crate) fn solve_inverse_outcomes(
    a: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<Vec<SolveOutcome>, EngineError> {
    solve_basis_targets(a, a.cols(), cfg)
}

/// Row records for the pseudoinverse of `a` (already corrected by `A^T`),
/// indexed by row.
pub(crate) fn solve_pinv_outcomes(
    a: &DenseMatrix,
    b_gram: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<Vec<SolveOutcome>, EngineError> {
    let raw = solve_basis_targets(b_gram, a.cols(), cfg)?;
    Ok(raw
        .into_iter()
        .map(|out| {
            let row = a.matvec(&out.solution).expect("gram dims match A cols");
            SolveOutcome {
                solution: row,
                iterations: out.iterations,
                final_criterion_value: out.final_criterion_value,
                termination: out.termination,
            }
        })
        .collect())
}

/// Solves row `i` of the pseudoinverse: the row problem `min_c ||c B - e_i^T||^2`
/// against the symmetric `B`, followed by the `A^T` correction. Returns the
/// corrected row (length `n`) in the outcome's solution.
pub fn solve_pseudoinverse_row(
    a: &DenseMatrix,
    b_gram: &DenseMatrix,
    i: usize,
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    // B is symmetric, so the row problem transposes onto the usual column
    // form with the same matrix.
    let e_i = Vector::basis(b_gram.rows(), i);
    let out = solve_least_squares(b_gram, &e_i, cfg)?;
    // Row correction: b_i = c_i A^T, i.e. (A c_i^T)^T.
    let row = a.matvec(&out.solution).expect("gram dims match A cols");
    Ok(SolveOutcome {
        solution: row,
        iterations: out.iterations,
        final_criterion_value: out.final_criterion_value,
        termination: out.termination,
    })
}

/// Estimates `A^{-1}` one column at a time with the configured solver.
pub fn estimate_inverse(a: &DenseMatrix, cfg: &SolverConfig) -> Result<InverseEstimate, EngineError> {
    if !a.is_square() {
        return Err(EngineError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let per_column = solve_inverse_outcomes(a, cfg)?;
    let mut matrix = DenseMatrix::zeros(n, n);
    for (i, out) in per_column.iter().enumerate() {
        matrix.set_column(i, &out.solution);
    }
    Ok(InverseEstimate {
        matrix,
        per_column,
        scale_d: 1.0,
    })
}

/// Estimates `A^{-1}` by running the column solves on `d A` and rescaling the
/// result by `d`, which rebalances the termination threshold on badly scaled
/// matrices. `Scale::Auto` picks `d = 1 / sigma_min(A)`.
pub fn estimate_inverse_scaled(
    a: &DenseMatrix,
    scale: Scale,
    cfg: &SolverConfig,
) -> Result<InverseEstimate, EngineError> {
    if !a.is_square() {
        return Err(EngineError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let d = match scale {
        Scale::Fixed(d) => {
            if !(d > 0.0) || !d.is_finite() {
                return Err(EngineError::InvalidScale { d });
            }
            d
        }
        Scale::Auto => {
            let s = spectral_summary(a, 1e-10, 10_000);
            if s.sigma_min == 0.0 {
                return Err(EngineError::SingularForAutoScale);
            }
            1.0 / s.sigma_min
        }
    };
    let scaled = a.scale(d);
    let base = estimate_inverse(&scaled, cfg)?;
    Ok(InverseEstimate {
        matrix: base.matrix.scale(d),
        per_column: base.per_column,
        scale_d: d,
    })
}

/// Estimates the left pseudoinverse `A^+ = (A^T A)^{-1} A^T` of a tall
/// full-rank matrix, row by row.
pub fn estimate_pseudoinverse(
    a: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<InverseEstimate, EngineError> {
    if a.rows() <= a.cols() {
        return Err(EngineError::NotTall {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let m = a.cols();
    let b_gram = a.gram();
    let per_column = solve_pinv_outcomes(a, &b_gram, cfg)?;
    let mut matrix = DenseMatrix::zeros(m, a.rows());
    for (i, out) in per_column.iter().enumerate() {
        matrix.set_row(i, &out.solution);
    }
    Ok(InverseEstimate {
        matrix,
        per_column,
        scale_d: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::SolverMethod;

    fn sd(eps: f64, dim: usize) -> SolverConfig {
        SolverConfig::new(SolverMethod::Sd, eps, dim)
    }

    #[test]
    fn identity_inverse_is_identity() {
        let a = DenseMatrix::identity(3);
        let est = estimate_inverse(&a, &sd(1e-8, 3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((est.matrix.get(i, j) - want).abs() <= 1e-8);
            }
        }
        assert_eq!(est.per_column.len(), 3);
        assert_eq!(est.scale_d, 1.0);
        assert!(est.capped_indices().is_empty());
    }

    #[test]
    fn diagonal_inverse() {
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let est = estimate_inverse(&a, &sd(1e-10, 2)).unwrap();
        assert!((est.matrix.get(0, 0) - 0.5).abs() < 1e-8);
        assert!((est.matrix.get(1, 1) - 0.25).abs() < 1e-8);
        assert!(est.matrix.get(0, 1).abs() < 1e-8);
    }

    #[test]
    fn one_by_one_matrix_is_supported() {
        let a = DenseMatrix::from_rows(&[&[4.0]]);
        let est = estimate_inverse(&a, &sd(1e-12, 1)).unwrap();
        assert!((est.matrix.get(0, 0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_rectangular_inverse_input() {
        let a = DenseMatrix::zeros(3, 2);
        assert!(matches!(
            estimate_inverse(&a, &sd(1e-6, 2)),
            Err(EngineError::NotSquare { .. })
        ));
    }

    #[test]
    fn scale_one_is_bit_identical_to_unscaled() {
        let a = DenseMatrix::from_rows(&[&[3.0, 1.0], &[1.0, 2.0]]);
        let cfg = sd(1e-9, 2);
        let plain = estimate_inverse(&a, &cfg).unwrap();
        let scaled = estimate_inverse_scaled(&a, Scale::Fixed(1.0), &cfg).unwrap();
        assert_eq!(plain.matrix, scaled.matrix);
        assert_eq!(plain.per_column, scaled.per_column);
    }

    #[test]
    fn fixed_scale_recovers_badly_scaled_diagonal() {
        let a = DenseMatrix::from_rows(&[&[0.01, 0.0], &[0.0, 1.0]]);
        let est = estimate_inverse_scaled(&a, Scale::Fixed(100.0), &sd(1e-8, 2)).unwrap();
        assert_eq!(est.scale_d, 100.0);
        assert!((est.matrix.get(0, 0) - 100.0).abs() < 1e-4);
        assert!((est.matrix.get(1, 1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_and_singular_scales_are_rejected() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            estimate_inverse_scaled(&a, Scale::Fixed(-1.0), &sd(1e-6, 2)),
            Err(EngineError::InvalidScale { .. })
        ));
        let singular = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(
            estimate_inverse_scaled(&singular, Scale::Auto, &sd(1e-6, 2)),
            Err(EngineError::SingularForAutoScale)
        ));
    }

    #[test]
    fn orthonormal_columns_pseudoinverse_is_transpose() {
        // 4x2 with top block I_2: A^+ = A^T.
        let a = DenseMatrix::from_rows(&[
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
        ]);
        let est = estimate_pseudoinverse(&a, &sd(1e-10, 2)).unwrap();
        assert_eq!(est.matrix.rows(), 2);
        assert_eq!(est.matrix.cols(), 4);
        for i in 0..2 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (est.matrix.get(i, j) - want).abs() < 1e-8,
                    "A+[{i},{j}] = {}",
                    est.matrix.get(i, j)
                );
            }
        }
    }

    #[test]
    fn pseudoinverse_rejects_wide_or_square_input() {
        assert!(matches!(
            estimate_pseudoinverse(&DenseMatrix::zeros(2, 3), &sd(1e-6, 3)),
            Err(EngineError::NotTall { .. })
        ));
        assert!(matches!(
            estimate_pseudoinverse(&DenseMatrix::identity(3), &sd(1e-6, 3)),
            Err(EngineError::NotTall { .. })
        ));
    }
}
