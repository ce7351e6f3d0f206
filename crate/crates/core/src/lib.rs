//! A laboratory for an ElGamal-disguised multiplicative-knapsack public-key
//! cryptosystem: the original deterministic scheme, its ciphertext-only and
//! distinguishing attacks, a randomized variant with consistency-checked
//! decryption, and executable IND-CCA2 experiments for both.

pub mod attack;
pub mod bits;
pub mod error;
pub mod game;
pub mod modified;
pub mod numtheory;
pub mod original;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use num_bigint::BigUint;
