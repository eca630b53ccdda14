use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system is not square: {equations} equations in {variables} variables")]
    NotSquare { equations: usize, variables: usize },
    #[error("equation {0} is constant; it has no total-degree start system")]
    ConstantEquation(usize),
    #[error("parse error at position {position}: {message}\n  {input}\n  {marker}^", marker = " ".repeat(*position))]
    Parse {
        position: usize,
        message: String,
        input: String,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("interval is empty: A = {a} must be below B = {b}")]
    EmptyInterval { a: f64, b: f64 },
    #[error("vehicle count must be positive")]
    NoVehicles,
    #[error("density must be univariate in `x`, found variables {0:?}")]
    BadDensity(Vec<String>),
    #[error("cost kernel must be univariate in `s`, found variables {0:?}")]
    BadCost(Vec<String>),
    #[error("expected {expected} positions, got {got}")]
    WrongVehicleCount { expected: usize, got: usize },
    #[error("positions must be strictly ascending with gaps above {tolerance:e}; violated at index {index}")]
    Ordering { index: usize, tolerance: f64 },
    #[error("position {index} = {value} lies outside [{a}, {b}]")]
    OutOfDomain { index: usize, value: f64, a: f64, b: f64 },
    #[error("both endpoints cannot be pinned for a single vehicle")]
    InvalidPin,
    #[error("finite-difference stencil leaves the ordered region (h = {0:e})")]
    StencilDegenerate(f64),
    #[error("brute-force grid has {0} points, above the size guard")]
    GridTooLarge(u128),
    #[error("no feasible candidate")]
    NoCandidates,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid tracker options: {0}")]
    InvalidOptions(String),
    #[error("singular linear system while {0}")]
    Singular(&'static str),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
