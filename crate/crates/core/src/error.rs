use thiserror::Error;

use crate::geom::Segment;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty instance")]
    EmptyInstance,
    #[error("invalid edge {0:?} for instance with {1} points")]
    InvalidEdge((usize, usize), usize),
    #[error("degenerate instance: all points coincide")]
    DegenerateInstance,
    #[error("duplicate point at line {0}")]
    DuplicatePoint(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("coordinate out of range at line {0}")]
    CoordinateRange(usize),
    #[error("matching requires even n (got {0})")]
    OddMatching(usize),
    #[error("instance too small: {0}")]
    TooSmall(String),
    #[error("generator: {0}")]
    Generator(String),
    #[error("cycling guard tripped after {0} iterations")]
    CyclingGuard(usize),
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("variable {var}: value {value} outside bounds [{lo}, {hi}]")]
    FixOutOfBounds { var: usize, value: f64, lo: f64, hi: f64 },
    #[error("LP infeasible under fixings ones={fixed_ones:?} zeros={fixed_zeros:?}")]
    Infeasible {
        fixed_ones: Vec<Segment>,
        fixed_zeros: Vec<Segment>,
    },
    #[error("LP unbounded")]
    Unbounded,
    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),
    #[error("no triangulation exists: all points collinear")]
    NoTriangulation,
    #[error("integrality check failed: {0}")]
    Integrality(String),
    #[error("inconsistent solution: {0}")]
    InconsistentSolution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
