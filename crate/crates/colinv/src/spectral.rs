//! Extreme singular values and the condition number.
//!
//! Only the two spectral extremes are ever needed here — they feed the error
//! bounds and the auto-scaling rule — so the full decomposition is skipped in
//! favor of power iteration on `A^T A` for `sigma_max` and inexact inverse
//! power iteration (inner solves by conjugate gradients) for `sigma_min`.
//!
//! Convergence is measured as the relative change of the eigenvalue estimate
//! between sweeps. The inner solves start loose and tighten as the outer
//! iteration stabilizes, which keeps the cost of one summary to a handful of
//! CG runs.

use crate::matrix::{dot, DenseMatrix};

/// Extreme singular values of a matrix, with convergence bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Smallest singular value; 0.0 when the matrix is singular to working
    /// precision.
    pub sigma_min: f64,
    /// Largest singular value.
    pub sigma_max: f64,
    /// `sigma_max / sigma_min`, or `+inf` when `sigma_min` is 0.
    pub kappa2: f64,
    /// False when either iteration hit its cap before the relative change
    /// dropped below tolerance; the values are then approximations.
    pub converged: bool,
}

/// `sigma_min` below this multiple of `sigma_max` is reported as exactly 0.
const SINGULAR_RTOL: f64 = 1e-13;

/// Applies `A^T A` without forming it.
fn apply_gram(a: &DenseMatrix, x: &[f64], ax: &mut [f64], out: &mut [f64]) {
    for (i, slot) in ax.iter_mut().enumerate() {
        *slot = dot(a.row(i), x);
    }
    out.iter_mut().for_each(|o| *o = 0.0);
    for (i, &v) in ax.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(a.row(i)) {
            *o += v * aij;
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Estimates `sigma_min(A)`, `sigma_max(A)` and `kappa2(A)`.
///
/// Both extreme eigenvalues of `A^T A` are iterated until their relative
/// change per sweep drops to `tol` or `max_iter` sweeps elapse;
/// non-convergence flags the summary approximate rather than failing.
pub fn spectral_summary(a: &DenseMatrix, tol: f64, max_iter: usize) -> SpectralSummary {
    assert!(tol > 0.0, "tolerance must be positive");
    let m = a.cols();
    let mut ax = vec![0.0; a.rows()];
    let mut work = vec![0.0; m];

    // Largest eigenvalue of A^T A by power iteration; deterministic start.
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda_max = 0.0f64;
    let mut converged_max = false;
    for _ in 0..max_iter {
        apply_gram(a, &v, &mut ax, &mut work);
        let lambda = dot(&v, &work);
        if normalize(&mut work) == 0.0 {
            // A^T A v vanished: the matrix is zero on the current subspace.
            lambda_max = 0.0;
            converged_max = true;
            break;
        }
        v.copy_from_slice(&work);
        if lambda > 0.0 && (lambda - lambda_max).abs() <= tol * lambda {
            lambda_max = lambda;
            converged_max = true;
            break;
        }
        lambda_max = lambda;
    }
    let sigma_max = lambda_max.max(0.0).sqrt();

    if sigma_max == 0.0 {
        return SpectralSummary {
            sigma_min: 0.0,
            sigma_max: 0.0,
            kappa2: f64::INFINITY,
            converged: converged_max,
        };
    }

    // Smallest eigenvalue by inexact inverse power iteration: each sweep
    // solves (A^T A) w = v with CG to a tolerance that tightens as the
    // Rayleigh quotient stabilizes. A singular matrix shows up as a Rayleigh
    // quotient collapsing below the singularity floor.
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda_min = f64::INFINITY;
    let mut converged_min = false;
    let floor = (SINGULAR_RTOL * sigma_max) * (SINGULAR_RTOL * sigma_max);
    let max_inner = 40 * m;
    let mut inner_tol = 1e-2f64;
    let mut w = vec![0.0; m];
    for _ in 0..max_iter {
        cg_gram_solve(a, &v, inner_tol, max_inner, &mut ax, &mut w);
        let wn2 = dot(&w, &w);
        if wn2 == 0.0 || !wn2.is_finite() {
            break;
        }
        // Rayleigh quotient of A^T A at w: ||A w||^2 / ||w||^2.
        for (i, slot) in ax.iter_mut().enumerate() {
            *slot = dot(a.row(i), &w);
        }
        let lambda = dot(&ax, &ax) / wn2;
        let rel_change = if lambda_min.is_finite() && lambda > 0.0 {
            (lambda - lambda_min).abs() / lambda
        } else {
            f64::INFINITY
        };
        lambda_min = lambda;
        v.copy_from_slice(&w);
        normalize(&mut v);
        if rel_change <= tol || lambda <= floor {
            converged_min = true;
            break;
        }
        inner_tol = (0.1 * rel_change).clamp(1e-13, 1e-2);
    }
    let mut sigma_min = if lambda_min.is_finite() {
        lambda_min.max(0.0).sqrt()
    } else {
        0.0
    };

    if sigma_min <= SINGULAR_RTOL * sigma_max {
        sigma_min = 0.0;
    }
    let kappa2 = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    SpectralSummary {
        sigma_min,
        sigma_max,
        kappa2,
        converged: converged_max && converged_min,
    }
}

/// Plain CG on `(A^T A) w = b` down to a relative residual of `tol_rel`
/// (or `max_iter` steps). Stagnation just stops early.
fn cg_gram_solve(
    a: &DenseMatrix,
    b: &[f64],
    tol_rel: f64,
    max_iter: usize,
    ax: &mut [f64],
    w: &mut [f64],
) {
    let m = a.cols();
    w.iter_mut().for_each(|x| *x = 0.0);
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol_rel * tol_rel * rr;
    if rr == 0.0 {
        return;
    }
    let mut hp = vec![0.0; m];
    for _ in 0..max_iter {
        apply_gram(a, &p, ax, &mut hp);
        let php = dot(&p, &hp);
        if php <= 0.0 || !php.is_finite() {
            break;
        }
        let alpha = rr / php;
        for i in 0..m {
            w[i] += alpha * p[i];
            r[i] -= alpha * hp[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next <= target || !rr_next.is_finite() {
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_extremes() {
        let a = DenseMatrix::from_rows(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let s = spectral_summary(&a, 1e-12, 500);
        assert!((s.sigma_max - 3.0).abs() < 1e-9, "sigma_max = {}", s.sigma_max);
        assert!((s.sigma_min - 1.0).abs() < 1e-9, "sigma_min = {}", s.sigma_min);
        assert!((s.kappa2 - 3.0).abs() < 1e-8);
        assert!(s.converged);
    }

    #[test]
    fn identity_is_perfectly_conditioned() {
        let s = spectral_summary(&DenseMatrix::identity(5), 1e-12, 500);
        assert!((s.sigma_max - 1.0).abs() < 1e-10);
        assert!((s.sigma_min - 1.0).abs() < 1e-10);
        assert!((s.kappa2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scaled_identity_matches_scale() {
        let c = -2.5f64;
        let a = DenseMatrix::identity(4).scale(c);
        let s = spectral_summary(&a, 1e-10, 500);
        assert!((s.sigma_min - c.abs()).abs() < 1e-8);
        assert!((s.sigma_max - c.abs()).abs() < 1e-8);
    }

    #[test]
    fn singular_matrix_reports_zero_and_infinite_kappa() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let s = spectral_summary(&a, 1e-10, 500);
        assert_eq!(s.sigma_min, 0.0);
        assert!(s.kappa2.is_infinite());
        assert!(s.sigma_max > 0.0);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let a = DenseMatrix::zeros(3, 3);
        let s = spectral_summary(&a, 1e-10, 100);
        assert_eq!(s.sigma_max, 0.0);
        assert_eq!(s.sigma_min, 0.0);
        assert!(s.kappa2.is_infinite());
    }

    #[test]
    fn rectangular_extremes_match_gram_eigenvalues() {
        // 3x2 with known singular values: columns orthogonal with norms 2, 0.5.
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 0.5], &[0.0, 0.0]]);
        let s = spectral_summary(&a, 1e-12, 1000);
        assert!((s.sigma_max - 2.0).abs() < 1e-9);
        assert!((s.sigma_min - 0.5).abs() < 1e-9);
    }
}
