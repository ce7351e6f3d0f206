//! Message-recovery attacks on the original scheme and the comparison
//! distinguisher.
//!
//! Because `s_i` is the same for every index, `C1 = s^h` leaks the Hamming
//! weight `h` of the plaintext. Recovering the message then reduces to finding
//! a weight-`h` subset of the public `u_i` whose product is `C2`, which takes
//! at most `C(n, h) <= 2^(n H(h/n))` trials.

mod exhaustive;
mod mitm;

use std::time::Duration;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::numtheory::{binary_entropy, binomial, entropy_bound};
use crate::{modified, original};

pub use exhaustive::exhaustive_subset_attack;
pub use mitm::{mitm_randomness_attack, mitm_subset_attack, mitm_subset_attack_with, MitmConfig, RandomnessRecovery};

/// Largest `n` the subset attacks accept (subsets are tracked as `u64` masks).
pub const MAX_ATTACK_N: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Exhaustive,
    MeetInTheMiddle,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::MeetInTheMiddle => "mitm",
        }
    }
}

/// Outcome of a ciphertext-only attack.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub strategy: Strategy,
    pub n: usize,
    pub recovered_h: usize,
    /// Every weight-`h` message re-encrypting to the target, sorted.
    pub candidates: Vec<BitVector>,
    /// Full weight-`h` subsets tested (exhaustive) or list entries built (MITM).
    pub subsets_examined: u64,
    /// `C(n, h)`.
    pub exact_count: BigUint,
    /// `2^(n H(h/n))`.
    pub predicted_bound: f64,
    pub elapsed: Duration,
}

/// Column names of [`AttackReport::csv_row`].
pub const BENCH_CSV_HEADER: &str = "n,h,exact,bound,examined,elapsed_ms,n_candidates";

impl AttackReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6e},{},{:.3},{}",
            self.n,
            self.recovered_h,
            self.exact_count,
            self.predicted_bound,
            self.subsets_examined,
            self.elapsed.as_secs_f64() * 1e3,
            self.candidates.len()
        )
    }
}

fn check_attack_size(n: usize) -> Result<()> {
    if n > MAX_ATTACK_N {
        Err(Error::TooLarge { n, limit: MAX_ATTACK_N })
    } else {
        Ok(())
    }
}

/// Smallest `h` in `1..=n` with `s^h = C1` over the integers.
pub fn recover_hamming_weight(pk: &original::PublicKey, c1: &BigUint) -> Result<usize> {
    let s = pk.s();
    let mut power = BigUint::one();
    for h in 1..=pk.n() {
        power *= s;
        if power == *c1 {
            return Ok(h);
        }
        if power > *c1 {
            break;
        }
    }
    Err(Error::MalformedCiphertext("C1 is not s^h for any 1 <= h <= n".into()))
}

/// Weight recovery when `C1'` is reduced mod `p`: a linear scan of
/// `s, s^2, .., s^n mod p`.
pub fn recover_hamming_weight_mod(pk: &modified::PublicKey, c1_prime: &BigUint) -> Result<usize> {
    let p = pk.modulus();
    let mut power = BigUint::one();
    for h in 1..=pk.n() {
        power = power * pk.s() % p;
        if power == *c1_prime {
            return Ok(h);
        }
    }
    Err(Error::MalformedCiphertext("C1' is not s^h mod p for any 1 <= h <= n".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `h` well below `n/2`: the attack is cheap.
    Small,
    /// `h` near `n/2`: the search approaches `2^n`.
    Medium,
    /// `h` well above `n/2`: cheap again.
    Large,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Small => "small",
            Regime::Medium => "medium",
            Regime::Large => "large",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityProfile {
    pub n: usize,
    pub h: usize,
    pub exact: BigUint,
    pub bound: f64,
    pub regime: Regime,
}

/// Entropy above which a weight counts as medium.
pub const DEFAULT_MEDIUM_ENTROPY: f64 = 0.9;

pub fn attack_complexity_profile(n: usize, h: usize) -> Result<ComplexityProfile> {
    attack_complexity_profile_with(n, h, DEFAULT_MEDIUM_ENTROPY)
}

pub fn attack_complexity_profile_with(n: usize, h: usize, medium_entropy: f64) -> Result<ComplexityProfile> {
    let exact = binomial(n, h)?;
    let bound = entropy_bound(n, h)?;
    let lambda = if n == 0 { 0.0 } else { h as f64 / n as f64 };
    let regime = if binary_entropy(lambda) > medium_entropy {
        Regime::Medium
    } else if lambda < 0.5 {
        Regime::Small
    } else {
        Regime::Large
    };
    Ok(ComplexityProfile { n, h, exact, bound, regime })
}

impl ComplexityProfile {
    pub fn exact_f64(&self) -> f64 {
        self.exact.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Returns 0 iff `encrypt(pk, m0)` equals the challenge, else 1.
pub fn deterministic_distinguisher(
    pk: &original::PublicKey,
    m0: &BitVector,
    m1: &BitVector,
    challenge: &original::Ciphertext,
) -> Result<u8> {
    if m0.len() != pk.n() || m1.len() != pk.n() {
        return Err(Error::LengthMismatch { expected: pk.n(), actual: m0.len().max(m1.len()) });
    }
    let c0 = original::encrypt(pk, m0)?;
    Ok(if c0 == *challenge { 0 } else { 1 })
}
