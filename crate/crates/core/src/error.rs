use thiserror::Error;

/// Errors produced by the linear algebra kernel, the estimators and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvarError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: |h[{row},{col}] - conj(h[{col},{row}])| exceeds tolerance")]
    NotHermitian { row: usize, col: usize },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}, threshold {threshold:e}")]
    NotPositiveDefinite { pivot: usize, value: f64, threshold: f64 },

    #[error("invalid lower-triangular factor: {0}")]
    InvalidFactor(String),

    #[error("order too large: K = {order} requires more than {samples} samples")]
    OrderTooLarge { order: usize, samples: usize },

    #[error("insufficient samples for {method}: need N - K >= {needed}, have {available}")]
    InsufficientSamples {
        method: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("rank-deficient regressors: Gram matrix {gram} is singular")]
    RankDeficient { gram: &'static str },

    #[error("numerical overflow at sample {sample}: magnitude exceeds {limit:e}")]
    NumericalOverflow { sample: usize, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, SvarError>;
