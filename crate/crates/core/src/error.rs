use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("knots are not non-decreasing at position {0}")]
    NonIncreasing(usize),
    #[error("too few knots: {0}")]
    TooFewKnots(String),
    #[error("knot vector has no span of positive length")]
    EmptyDomain,
    #[error("knot {value} has multiplicity {mult}, limit is {limit}")]
    MultiplicityTooHigh { value: f64, mult: usize, limit: usize },
    #[error("knot vector does not fit mode: {0}")]
    ModeMismatch(String),
    #[error("basis index {index} out of range (count {count})")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("parameter {t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("parametric speed vanishes at t = {t}")]
    NonRegular { t: f64 },
    #[error("preimage vanishes at t = {t}")]
    ZeroPreimage { t: f64 },
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("degenerate discriminant: {0}")]
    DegenerateDiscriminant(String),
    #[error("newton iteration did not converge (residual {residual:e})")]
    NoConvergence {
        best: Vec<num_complex::Complex64>,
        residual: f64,
    },
    #[error("tangent vector is zero")]
    ZeroTangent,
    #[error("tangent is axis aligned; rotate the data first")]
    AxisAlignedTangent,
    #[error("conics are proportional")]
    IdenticalConics,
    #[error("no degenerate pencil member could be split")]
    SplitFailure,
    #[error("hermite problem has no solutions")]
    NoSolutions(Box<crate::hermite::HermiteReport>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
