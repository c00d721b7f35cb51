//! Fixtures shared by the kernel benches.

use allmach_core::{make_problem, Boundary, ConservedField, EpsilonParams};

/// Initial field of a named problem at `n` nodes per unit of its default aspect
/// ratio, with ghosts filled.
pub fn fixture(
    problem: &str,
    eps: Option<f64>,
    nx: usize,
) -> (ConservedField, EpsilonParams, Boundary) {
    let mut spec = make_problem(problem).expect("known problem");
    if let Some(e) = eps {
        spec = spec.with_eps(e);
    }
    let ny = if spec.dim == 1 {
        1
    } else {
        spec.resolution.1 * nx / spec.resolution.0
    };
    let grid = spec.grid(nx, ny).expect("grid");
    let field = spec.initial_field(&grid).expect("initial data");
    (field, spec.eps_params().expect("eps"), spec.bc)
}
