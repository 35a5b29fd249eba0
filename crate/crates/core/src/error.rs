use thiserror::Error;

/// Errors produced by the numerical kernels and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("modulus {base}^{depth} exceeds the index cap 2^62")]
    ModulusOverflow { base: u64, depth: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dense size {n} exceeds the configured cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("problem too large for {method}: {detail}")]
    ScaleExceeded {
        method: &'static str,
        detail: String,
    },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("eigensolver did not converge: {0}")]
    EigenNoConvergence(String),

    #[error("norm estimate hit the cap of {iterations} iterations; last two estimates {previous} and {last}")]
    IterationCap {
        iterations: usize,
        previous: f64,
        last: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed binary file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
