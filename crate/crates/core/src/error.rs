use thiserror::Error;

/// Errors raised by the number-theory layer, the two schemes and the attacks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("value has no inverse modulo the given modulus")]
    NoInverse,
    #[error("bit vector must be non-empty and contain only 0/1 entries")]
    InvalidBits,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("the all-zero message carries no information and is rejected")]
    ZeroMessage,
    #[error("message outside the admissible range")]
    MessageOutOfRange,
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("instance too large: n = {n} exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid key: {0}")]
    InvalidKey(String),
}

pub type Result<T> = std::result::Result<T, Error>;
