use thiserror::Error;

/// Errors raised by factorizations, filter construction and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e} > tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite (pivot {index} = {pivot:.3e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is rank deficient at column {column} (|R[k][k]| = {magnitude:.3e})")]
    RankDeficient { column: usize, magnitude: f64 },

    #[error("triangular matrix is singular at diagonal index {index}")]
    SingularTriangular { index: usize },

    #[error("matrix is not orthonormal (‖QᴴQ − I‖max = {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("filter is not a standard whitening filter (residual {residual:.3e})")]
    NotAnSwf { residual: f64 },

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("too few samples: {n} (need at least {required})")]
    TooFewSamples { n: usize, required: usize },

    #[error("symbol index {index} out of range for a {size}-point constellation")]
    BadSymbolIndex { index: usize, size: usize },

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
