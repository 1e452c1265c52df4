use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence exponent m = {0} is outside 1..={max}", max = crate::cs::MAX_M)]
    ExponentOutOfRange(usize),

    #[error("index n = {n} is outside 1..={m}")]
    IndexOutOfRange { n: usize, m: usize },

    #[error("invalid permutation {0:?}: must be a bijection on 1..=m")]
    InvalidPermutation(Vec<usize>),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("phase alphabet size H = {0} must be even when m >= 2")]
    OddPhaseAlphabet(u32),

    #[error("phase alphabet size must be at least 1")]
    EmptyPhaseAlphabet,

    #[error("non-finite amplitude weight at position {0}")]
    NonFiniteWeight(usize),

    #[error("PMEPR of an all-zero sequence is undefined")]
    ZeroSequence,

    #[error("oversampling factor {0} is below the minimum of 4")]
    OversampleTooSmall(usize),

    #[error("invalid vote value {0}; expected -1, 0 or 1")]
    InvalidVote(i64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vote probabilities p = {p}, z = {z} leave q = {q} < 0")]
    InfeasibleDistribution { p: f64, z: f64, q: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
