use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("phase {phase} is outside Z_{q}")]
    InvalidPhase { phase: i64, q: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("not a desired PU matrix: entry ({i},{j}) at exponent {exp:?} is not a single root of unity")]
    NotDesired { i: usize, j: usize, exp: Vec<usize> },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("not a Butson-type Hadamard matrix")]
    NotBh,
    #[error("no Butson-type Hadamard matrices exist for q={q}, N={n}")]
    NoBhMatrices { q: usize, n: usize },
    #[error("no built-in representatives for q={q}, N={n}; supply representatives via file")]
    Uncataloged { q: usize, n: usize },
    #[error("enumeration of {needed} candidates exceeds the guard of {guard}")]
    GuardExceeded { needed: u128, guard: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
