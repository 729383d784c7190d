//! Rough timing probe for the per-column SD cost on the big sweep shapes.

use colinv::engine::estimate_inverse;
use colinv::gen::{sample_matrix, MatrixFamily};
use colinv::solvers::{sd_least_squares, SolverConfig, SolverMethod};
use colinv::spectral::spectral_summary;
use colinv::Vector;
use std::time::Instant;

fn main() {
    let a = sample_matrix(MatrixFamily::GaussianScaled { scale: 50.0 }, 100, 100, 0, 0, 0);
    let s = spectral_summary(&a, 1e-10, 10_000);
    println!(
        "sigma_min={:.3} sigma_max={:.1} kappa={:.0}",
        s.sigma_min, s.sigma_max, s.kappa2
    );

    for eps in [1e-1, 1e-3, 1e-5] {
        let mut cfg = SolverConfig::new(SolverMethod::Sd, eps, 100);
        cfg.max_iters = 20_000_000;
        let y = Vector::basis(100, 0);
        let t0 = Instant::now();
        let out = sd_least_squares(&a, &y, &cfg).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "eps={eps:>7e}: iters={:>9} wall={dt:>8.3}s  ({:.2} us/iter)  criterion={:.3e}",
            out.iterations,
            1e6 * dt / out.iterations.max(1) as f64,
            out.final_criterion_value
        );
    }

    // Whole-matrix estimate at a mid tolerance, parallel across columns.
    let mut cfg = SolverConfig::new(SolverMethod::Sd, 1e-3, 100);
    cfg.max_iters = 20_000_000;
    let t0 = Instant::now();
    let est = estimate_inverse(&a, &cfg).unwrap();
    println!(
        "full estimate eps=1e-3: total_iters={} wall={:.2}s",
        est.total_iterations(),
        t0.elapsed().as_secs_f64()
    );
}
