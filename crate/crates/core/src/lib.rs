//! Global optima of the one-dimensional polynomial coverage-control problem.
//!
//! The stationarity conditions of the expected cost are polynomial, so every
//! candidate optimum can be found by homotopy continuation and compared by
//! objective value. A Lloyd-style descent is included as a baseline.

pub mod error;
pub mod homotopy;
pub mod lloyd;
pub mod optimizer;
pub mod parallel;
pub mod poly;
pub mod problem;
pub mod regeneration;

pub use error::{PolyError, ProblemError, SolverError};
pub use problem::{BoundaryPin, Configuration, CoverageProblem, StationarityInstance};
