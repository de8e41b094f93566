use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wedge of a {lhs}-form and a {rhs}-form exceeds top degree 4")]
    DegreeOverflow { lhs: u8, rhs: u8 },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u8, found: u8 },

    #[error("singular metric: scale factor f{index} vanishes")]
    SingularMetric { index: usize },

    #[error("degenerate triple: {0}")]
    DegenerateTriple(&'static str),

    #[error("triple is not definite (wedge Gram eigenvalues {eigenvalues:?})")]
    IndefiniteTriple { eigenvalues: [f64; 3] },

    #[error("triple is not closed (max |dω| = {residual:e})")]
    NotClosed { residual: f64 },

    #[error("singular profile: product f_j f_k vanishes at {f:?}")]
    SingularProfile { f: [f64; 3] },

    #[error("parameter {name} = {value} out of range: {reason}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("framing coefficients must be positive, got {g:?}")]
    NonPositiveFraming { g: [f64; 3] },

    #[error("degenerate framing: {0}")]
    DegenerateFraming(&'static str),

    #[error("perturbation has spin-{spin} components beyond truncation max spin {max}")]
    TruncationIncomplete { spin: f64, max: f64 },

    #[error("eigenvalue mismatch: expected {expected}, found {found}")]
    EigenvalueMismatch { expected: f64, found: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
