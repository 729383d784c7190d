//! Column-wise estimation of matrix inverses and pseudoinverses.
//!
//! A nonsingular matrix satisfies `A b_i = e_i` column by column, so its
//! inverse can be assembled from independent least-squares solves
//! `min_b ||A b - e_i||^2` — one black-box solver call per column, no
//! factorization, and embarrassingly parallel. The same idea reaches the left
//! pseudoinverse of a tall full-rank matrix through its Gram matrix. This
//! crate provides:
//!
//! - [`matrix`]: dense row-major matrices/vectors and the direct elimination
//!   reference inverse used to measure estimates.
//! - [`solvers`]: steepest descent with backtracking line search, and
//!   conjugate gradients (plain or on the normal equations).
//! - [`engine`]: the per-column estimators, including the rescaled variant
//!   for badly scaled inputs.
//! - [`metrics`]: spectral/Frobenius/relative error reports and the proven
//!   error bounds for positive definite and tall full-rank inputs.
//! - [`spectral`]: extreme singular values by (inverse) power iteration.
//! - [`sim`]: a discrete simulator for master/worker execution with
//!   replicated blocks and straggler models.
//! - [`experiments`]: seeded Gaussian families and sweep drivers that
//!   reproduce the reference accuracy tables.
//! - [`io`]: CSV and binary matrix file formats.

pub mod engine;
pub mod experiments;
pub mod gen;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod sim;
pub mod solvers;
pub mod spectral;

pub use engine::{
    estimate_inverse, estimate_inverse_scaled, estimate_pseudoinverse, EngineError, EstimateMode,
    InverseEstimate, Scale,
};
pub use matrix::{DenseMatrix, MatrixError, Vector};
pub use metrics::{corollary_bounds, error_report, prop1_bounds, ErrorReport};
pub use solvers::{
    cg_least_squares, sd_least_squares, solve_least_squares, InitRule, SolveError, SolveOutcome,
    SolverConfig, SolverMethod, Termination,
};
pub use spectral::{spectral_summary, SpectralSummary};
