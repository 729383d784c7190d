//! Error metrics for inverse estimates and the theoretical bound checks.
//!
//! Three metrics compare an estimate against a reference matrix: the squared
//! spectral norm of the difference (`err_l2`), the squared Frobenius norm
//! (`err_f`), and the Frobenius error relative to the reference
//! (`err_rf = err_f / ||reference||_F^2`).
//!
//! The bounds: for positive definite `A` solved by SD at gradient tolerance
//! `epsilon`, `err_f <= n eps^2 / 2` and `err_rf <= (n eps^2 / 2) / sigma_min^2`.
//! For the pseudoinverse of a tall full-rank `A`,
//! `err_f <= m (eps kappa2 / (sqrt(2) sigma_min))^2` and
//! `err_rf <= m eps^2 kappa2^2 / 2`.

use crate::matrix::{dot, DenseMatrix, MatrixError};
use crate::spectral::spectral_summary;

/// Tolerance for the spectral summaries feeding the bound formulas. Carried
/// into the reports so near-boundary comparisons can be triaged.
pub const BOUND_SIGMA_TOL: f64 = 1e-10;

/// Iteration cap for the power iteration behind `err_l2`. If the cap is hit
/// the value is a lower-bound estimate of the true squared spectral norm.
const ERR_L2_MAX_ITERS: usize = 1000;

/// The three error metrics, with optional bound values attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Squared spectral norm of `estimate - reference`.
    pub err_l2: f64,
    /// Squared Frobenius norm of `estimate - reference`.
    pub err_f: f64,
    /// `err_f / ||reference||_F^2`.
    pub err_rf: f64,
    pub bound_f: Option<f64>,
    pub bound_rf: Option<f64>,
    /// `(err_f <= bound_f, err_rf <= bound_rf)` when bounds are attached.
    pub bound_satisfied: Option<(bool, bool)>,
}

impl ErrorReport {
    /// Attaches bound values and evaluates the pass flags.
    pub fn with_bounds(mut self, bound_f: f64, bound_rf: f64) -> Self {
        self.bound_f = Some(bound_f);
        self.bound_rf = Some(bound_rf);
        self.bound_satisfied = Some((self.err_f <= bound_f, self.err_rf <= bound_rf));
        self
    }
}

/// Proposition-style inverse bounds: `(n eps^2 / 2, (n eps^2 / 2) / sigma_min^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Bounds {
    pub bound_f: f64,
    pub bound_rf: f64,
    /// Whether the hypothesis of the bound (symmetric positive definite
    /// input) actually held for this matrix.
    pub hypothesis_spd: bool,
    pub sigma_min: f64,
    /// Tolerance the spectral quantities were estimated at.
    pub sigma_tol: f64,
}

/// Pseudoinverse bounds: `(m (eps kappa / (sqrt(2) sigma_min))^2, m eps^2 kappa^2 / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryBounds {
    pub bound_f: f64,
    pub bound_rf: f64,
    pub sigma_min: f64,
    pub kappa2: f64,
    pub sigma_tol: f64,
}

/// Compares an estimate against a reference matrix.
pub fn error_report(
    reference: &DenseMatrix,
    estimate: &DenseMatrix,
) -> Result<ErrorReport, MatrixError> {
    let diff = estimate.sub(reference)?;
    let err_f = diff.frobenius_norm_sq();
    let ref_f = reference.frobenius_norm_sq();
    let err_rf = if ref_f > 0.0 { err_f / ref_f } else { f64::INFINITY };
    let err_l2 = spectral_norm_sq(&diff);
    Ok(ErrorReport {
        err_l2,
        err_f,
        err_rf,
        bound_f: None,
        bound_rf: None,
        bound_satisfied: None,
    })
}

/// Squared spectral norm by power iteration on `D^T D` with a deterministic
/// start; capped at [`ERR_L2_MAX_ITERS`] sweeps.
pub fn spectral_norm_sq(d: &DenseMatrix) -> f64 {
    let m = d.cols();
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut dv = vec![0.0; d.rows()];
    let mut next = vec![0.0; m];
    let mut lambda = 0.0f64;
    for _ in 0..ERR_L2_MAX_ITERS {
        for (i, slot) in dv.iter_mut().enumerate() {
            *slot = dot(d.row(i), &v);
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &r) in dv.iter().enumerate() {
            if r == 0.0 {
                continue;
            }
            for (nj, dij) in next.iter_mut().zip(d.row(i)) {
                *nj += r * dij;
            }
        }
        let new_lambda = dot(&v, &next);
        let norm = dot(&next, &next).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (vj, nj) in v.iter_mut().zip(&next) {
            *vj = nj / norm;
        }
        if new_lambda > 0.0 && (new_lambda - lambda).abs() <= 1e-12 * new_lambda {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda.max(0.0)
}

/// The inverse bound formulas from already-known `sigma_min`:
/// `(n eps^2 / 2, (n eps^2 / 2) / sigma_min^2)`.
pub fn prop1_bound_values(n: usize, epsilon: f64, sigma_min: f64) -> (f64, f64) {
    let bound_f = n as f64 * epsilon * epsilon / 2.0;
    let bound_rf = if sigma_min > 0.0 {
        bound_f / (sigma_min * sigma_min)
    } else {
        f64::INFINITY
    };
    (bound_f, bound_rf)
}

/// Bound values for the inverse estimate at gradient tolerance `epsilon`.
///
/// The bound is a theorem only for symmetric positive definite matrices; the
/// report records whether that hypothesis held so callers can treat other
/// inputs as informative rather than guaranteed.
pub fn prop1_bounds(a: &DenseMatrix, epsilon: f64) -> Result<Prop1Bounds, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    assert!(epsilon > 0.0, "epsilon must be positive");
    let s = spectral_summary(a, BOUND_SIGMA_TOL, 10_000);
    let (bound_f, bound_rf) = prop1_bound_values(a.rows(), epsilon, s.sigma_min);
    let hypothesis_spd = a.is_symmetric() && is_positive_definite(a);
    Ok(Prop1Bounds {
        bound_f,
        bound_rf,
        hypothesis_spd,
        sigma_min: s.sigma_min,
        sigma_tol: BOUND_SIGMA_TOL,
    })
}

/// The pseudoinverse bound formulas from already-known spectral extremes:
/// `(m (eps kappa / (sqrt(2) sigma_min))^2, m eps^2 kappa^2 / 2)`.
pub fn corollary_bound_values(m: usize, epsilon: f64, sigma_min: f64, kappa2: f64) -> (f64, f64) {
    if sigma_min > 0.0 && kappa2.is_finite() {
        let per_row = epsilon * kappa2 / (std::f64::consts::SQRT_2 * sigma_min);
        (
            m as f64 * per_row * per_row,
            m as f64 * epsilon * epsilon * kappa2 * kappa2 / 2.0,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    }
}

/// Bound values for the pseudoinverse estimate of a tall full-rank matrix.
pub fn corollary_bounds(a: &DenseMatrix, epsilon: f64) -> Result<CorollaryBounds, MatrixError> {
    if a.rows() <= a.cols() {
        return Err(MatrixError::DimensionMismatch {
            expected: (a.cols() + 1, a.cols()),
            got: (a.rows(), a.cols()),
        });
    }
    assert!(epsilon > 0.0, "epsilon must be positive");
    let s = spectral_summary(a, BOUND_SIGMA_TOL, 10_000);
    let (bound_f, bound_rf) = corollary_bound_values(a.cols(), epsilon, s.sigma_min, s.kappa2);
    Ok(CorollaryBounds {
        bound_f,
        bound_rf,
        sigma_min: s.sigma_min,
        kappa2: s.kappa2,
        sigma_tol: BOUND_SIGMA_TOL,
    })
}

/// Cholesky probe: succeeds exactly when the (symmetric) input is positive
/// definite. Internal to the bound hypothesis check.
fn is_positive_definite(a: &DenseMatrix) -> bool {
    let n = a.rows();
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_difference_means_zero_errors() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let r = error_report(&m, &m).unwrap();
        assert_eq!(r.err_f, 0.0);
        assert_eq!(r.err_rf, 0.0);
        assert_eq!(r.err_l2, 0.0);
    }

    #[test]
    fn rank_one_perturbation_of_identity() {
        let reference = DenseMatrix::identity(2);
        let mut estimate = DenseMatrix::identity(2);
        estimate.set(0, 0, 1.1);
        let r = error_report(&reference, &estimate).unwrap();
        assert!((r.err_f - 0.01).abs() < 1e-12);
        assert!((r.err_rf - 0.005).abs() < 1e-12);
        assert!((r.err_l2 - 0.01).abs() < 1e-10);
    }

    #[test]
    fn err_l2_never_exceeds_err_f() {
        let reference = DenseMatrix::from_rows(&[&[2.0, 0.1], &[0.3, -1.0]]);
        let estimate = DenseMatrix::from_rows(&[&[2.2, 0.4], &[0.1, -1.3]]);
        let r = error_report(&reference, &estimate).unwrap();
        assert!(r.err_l2 <= r.err_f + 1e-15);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = DenseMatrix::zeros(2, 2);
        let b = DenseMatrix::zeros(2, 3);
        assert!(error_report(&a, &b).is_err());
    }

    #[test]
    fn prop1_formula_values() {
        // n = 100, eps = 1e-3: bound_f = 100 * 1e-6 / 2 = 5e-5.
        let a = DenseMatrix::identity(100);
        let b = prop1_bounds(&a, 1e-3).unwrap();
        assert!((b.bound_f - 5e-5).abs() < 1e-18);
        // sigma_min = 1 for the identity, so both bounds agree.
        assert!((b.bound_rf - b.bound_f).abs() < 1e-12 * b.bound_f.max(1e-300));
        assert!(b.hypothesis_spd);
    }

    #[test]
    fn prop1_flags_non_spd_hypothesis() {
        let a = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = prop1_bounds(&a, 1e-2).unwrap();
        assert!(!b.hypothesis_spd);
        let asym = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(!prop1_bounds(&asym, 1e-2).unwrap().hypothesis_spd);
    }

    #[test]
    fn prop1_singular_gives_infinite_relative_bound() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let b = prop1_bounds(&a, 1e-2).unwrap();
        assert!(b.bound_rf.is_infinite());
        assert!(b.bound_f.is_finite());
    }

    #[test]
    fn corollary_orthonormal_columns() {
        // 10x5 with orthonormal columns: kappa = sigma_min = 1, m = 5,
        // eps = 1e-2 -> bound_f = 5 (1e-2 / sqrt(2))^2 = 2.5e-4.
        let mut a = DenseMatrix::zeros(10, 5);
        for i in 0..5 {
            a.set(i, i, 1.0);
        }
        let b = corollary_bounds(&a, 1e-2).unwrap();
        assert!((b.bound_f - 2.5e-4).abs() < 1e-12, "bound_f = {}", b.bound_f);
        assert!((b.bound_rf - 2.5e-4).abs() < 1e-12);
    }

    #[test]
    fn corollary_bound_scales_inverse_quadratically() {
        // Scaling A by c leaves kappa unchanged and scales sigma_min by c,
        // so bound_f scales by 1/c^2 while bound_rf is unchanged.
        let a = DenseMatrix::from_rows(&[
            &[1.0, 0.3],
            &[-0.2, 1.4],
            &[0.5, 0.8],
        ]);
        let c = 4.0;
        let b1 = corollary_bounds(&a, 1e-3).unwrap();
        let b2 = corollary_bounds(&a.scale(c), 1e-3).unwrap();
        assert!((b2.kappa2 - b1.kappa2).abs() < 1e-6 * b1.kappa2);
        assert!((b2.bound_f - b1.bound_f / (c * c)).abs() < 1e-6 * b1.bound_f);
        assert!((b2.bound_rf - b1.bound_rf).abs() < 1e-6 * b1.bound_rf);
    }

    #[test]
    fn bounds_are_quartic_in_epsilon_halving() {
        let a = DenseMatrix::identity(8);
        let b1 = prop1_bounds(&a, 2e-3).unwrap();
        let b2 = prop1_bounds(&a, 1e-3).unwrap();
        assert_eq!(b1.bound_f, 4.0 * b2.bound_f);
    }

    #[test]
    fn with_bounds_sets_flags() {
        let m = DenseMatrix::identity(2);
        let mut e = DenseMatrix::identity(2);
        e.set(0, 1, 1e-3);
        let r = error_report(&m, &e).unwrap().with_bounds(1.0, 1e-9);
        assert_eq!(r.bound_satisfied, Some((true, false)));
    }
}
