//! Exact big-integer number theory and the two easy knapsack solvers.
//!
//! All arithmetic is arbitrary precision; nothing is reduced unless a function
//! takes a modulus.

mod arith;
mod combinatorics;
mod knapsack;
mod primes;

pub use arith::{gcd, mod_inv, mod_pow};
pub use combinatorics::{binary_entropy, binomial, entropy_bound, Combinations};
pub use knapsack::{
    gen_superincreasing, gen_superincreasing_coprime, gen_superincreasing_with,
    solve_coprime_subset_product, solve_superincreasing_subset_sum, SequenceParams,
    SubsetProduct, SuperIncreasingSeq,
};
pub use primes::{
    gen_prime_sequence, gen_safe_prime, is_probable_prime, next_prime, primes_below,
    PrimeSequence, SafePrimeGroup, DEFAULT_MR_ROUNDS,
};

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

/// Uniform integer in the inclusive range `[lo, hi]`.
pub(crate) fn random_between<R: Rng + ?Sized>(lo: &BigUint, hi: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_range(lo, &(hi + 1u32))
}
