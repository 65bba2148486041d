use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid vertex count n = {n}: {reason}")]
    InvalidN { n: usize, reason: &'static str },

    #[error("invalid pair ({i}, {j}) for n = {n}")]
    InvalidPair { n: usize, i: usize, j: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("not a permutation of 1..={n}")]
    InvalidPermutation { n: usize },

    #[error("n = {n} exceeds the limit of {limit} for {what}")]
    TooLarge {
        n: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("spectrum is not positive: {0:?}")]
    SingularSpectrum([f64; 3]),

    #[error("point is not in the polytope (worst violation {worst_violation:e})")]
    NotInPolytope { worst_violation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polytope has no strictly feasible point")]
    Infeasible,

    #[error("polytope appears to be unbounded")]
    Unbounded,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        /// Last iterate, flattened as the solver's own variable vector.
        last: Vec<f64>,
    },

    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
