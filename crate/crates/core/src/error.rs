use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("column {0} of the matrix is zero")]
    ZeroColumn(usize),

    #[error("negative matrix entry at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize },

    #[error("parameter {0} is missing from the assignment")]
    MissingParameter(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter lists differ")]
    ParameterMismatch,

    #[error("a denominator factor vanishes at the evaluation point")]
    VanishingDenominator,

    #[error("zero base raised to a negative exponent")]
    ZeroBaseNegativeExponent,

    #[error("exponent is not an integer at this assignment")]
    NonIntegralExponent,

    #[error("exponent still depends on parameters")]
    ParametricExponent,

    #[error("factor {0} has no power-series expansion at 0")]
    NotExpandable(String),

    #[error("re-summation check failed in {stage}: {detail}")]
    Resummation { stage: String, detail: String },

    #[error("parametric exponent with no matching factor for z{0}")]
    UnsupportedEquality(usize),

    #[error("interpolation failed: {0}")]
    Interpolation(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("polytope is unbounded in coordinate {0}")]
    Unbounded(usize),

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("pieces disagree at {point:?}: {detail}")]
    PieceDisagreement { point: Vec<i64>, detail: String },

    #[error("integer overflow")]
    Overflow,
}
