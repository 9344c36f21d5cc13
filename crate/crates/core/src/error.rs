use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code parameters m={m}, r={r}: {reason}")]
    InvalidParams {
        m: usize,
        r: usize,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("exhaustive search needs k <= {max}, got k={k}")]
    TooLarge { k: usize, max: usize },

    #[error("probability {0} out of range")]
    InvalidProbability(f64),

    #[error("noise power must be positive, got {0}")]
    InvalidNoise(f64),

    #[error("code rate must be in (0, 1], got {0}")]
    InvalidRate(f64),

    #[error("node path {0} is not an end node of this code")]
    InvalidFrozenPath(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "run needs {requested} channel symbols, cap is {cap}; split into runs of at most {suggested_trials} trials"
    )]
    ResourceCap {
        requested: u128,
        cap: u128,
        suggested_trials: u64,
    },
}
