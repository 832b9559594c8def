//! Fixtures shared by the benchmarks.

use strainlim::problems::{smooth_problem, Problem, SourceMode};
use strainlim::{builtin_law, RegularizationParams, SymTensor};

/// Smooth manufactured problem on an `cells x cells` mesh.
pub fn smooth_fixture(cells: usize, n: f64, t: f64) -> Problem {
    let reg = RegularizationParams::new(n, t).expect("valid regularization");
    smooth_problem(cells, builtin_law(), reg, SourceMode::Regularized).expect("valid mesh")
}

/// Deterministic spread of right-hand sides for the local solve.
pub fn local_rhs(count: usize) -> Vec<SymTensor> {
    (0..count)
        .map(|i| {
            let x = i as f64;
            let scale = 10f64.powf(2.0 * (0.37 * x).sin());
            scale * SymTensor::new2((1.3 * x).sin(), (0.7 * x).cos(), (2.1 * x + 0.5).sin())
        })
        .collect()
}
