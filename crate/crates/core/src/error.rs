use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("boundary: {0}")]
    Boundary(String),
    #[error("non-physical state at node ({i}, {j}): {what}")]
    NonPhysical { i: isize, j: isize, what: String },
    #[error("positivity lost after step {step} at node ({i}, {j}): {what}")]
    Positivity {
        step: usize,
        i: isize,
        j: isize,
        what: String,
    },
    #[error(
        "elliptic solve did not converge: {iterations} iterations, relative residual {residual:e}"
    )]
    Convergence { iterations: usize, residual: f64 },
    #[error("invalid tableau '{name}': {why}")]
    Tableau { name: String, why: String },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
