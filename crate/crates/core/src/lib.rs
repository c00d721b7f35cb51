//! Semi-implicit, asymptotic-preserving WENO solver for the ideal MHD
//! equations at all sonic Mach numbers.

pub mod baseline;
pub mod eigen;
pub mod elliptic;
pub mod error;
pub mod flux;
pub mod grid;
pub mod integrator;
pub mod operators;
pub mod problems;
pub mod state;
pub mod weno;

pub use baseline::Scheme;
pub use error::SolverError;
pub use grid::{Axis, Grid, Layout};
pub use integrator::{ButcherPair, DtLaw, StepStats};
pub use problems::{make_problem, ProblemSpec, PROBLEMS};
pub use state::{Boundary, ConservedField, EpsilonParams, Primitive};
