use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use super::primes::next_prime;
use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Positive integers where every term exceeds the sum of all earlier terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperIncreasingSeq(Vec<BigUint>);

impl SuperIncreasingSeq {
    pub fn new(terms: Vec<BigUint>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Parameter("sequence is empty".into()));
        }
        let mut sum = BigUint::zero();
        for (i, term) in terms.iter().enumerate() {
            if term.is_zero() || (i > 0 && *term <= sum) {
                return Err(Error::Parameter(format!(
                    "term {} = {term} breaks the super-increasing property",
                    i + 1
                )));
            }
            sum += term;
        }
        Ok(SuperIncreasingSeq(terms))
    }

    pub fn from_u64s(terms: &[u64]) -> Result<Self> {
        Self::new(terms.iter().map(|&t| BigUint::from(t)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[BigUint] {
        &self.0
    }

    pub fn product(&self) -> BigUint {
        self.0.iter().product()
    }

    pub fn sum(&self) -> BigUint {
        self.0.iter().sum()
    }
}

/// Shape of randomly generated super-increasing sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceParams {
    /// The first term is drawn from `[1, 2^first_bits)`.
    pub first_bits: u64,
    /// Each later term is `sum + 1 + slack` with `slack` drawn from `[0, 2^slack_bits)`.
    pub slack_bits: u64,
}

impl Default for SequenceParams {
    fn default() -> Self {
        SequenceParams { first_bits: 4, slack_bits: 4 }
    }
}

pub fn gen_superincreasing<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SuperIncreasingSeq> {
    gen_superincreasing_with(n, SequenceParams::default(), rng)
}

pub fn gen_superincreasing_with<R: Rng + ?Sized>(
    n: usize,
    params: SequenceParams,
    rng: &mut R,
) -> Result<SuperIncreasingSeq> {
    if n == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    let first_hi = BigUint::one() << params.first_bits.max(1);
    let slack_hi = BigUint::one() << params.slack_bits;
    let mut terms = Vec::with_capacity(n);
    let mut sum = rng.gen_biguint_range(&BigUint::one(), &first_hi);
    terms.push(sum.clone());
    for _ in 1..n {
        let term = &sum + 1u32 + rng.gen_biguint_below(&slack_hi);
        sum += &term;
        terms.push(term);
    }
    SuperIncreasingSeq::new(terms)
}

/// A super-increasing sequence of distinct primes, hence pairwise coprime.
/// Term `i` is the first prime after a random point in `(sum, 2 sum]`.
pub fn gen_superincreasing_coprime<R: Rng + ?Sized>(
    n: usize,
    first_bits: u64,
    rng: &mut R,
) -> Result<SuperIncreasingSeq> {
    if n == 0 {
        return Err(Error::Parameter("sequence length must be at least 1".into()));
    }
    let first_hi = BigUint::one() << first_bits.max(1);
    let mut terms = Vec::with_capacity(n);
    let mut sum = next_prime(&rng.gen_biguint_below(&first_hi));
    terms.push(sum.clone());
    for _ in 1..n {
        let start = &sum + rng.gen_biguint_below(&sum);
        let term = next_prime(&start);
        sum += &term;
        terms.push(term);
    }
    SuperIncreasingSeq::new(terms)
}

/// Greedy super-increasing subset-sum solver.
///
/// Walks `i = n .. 1`, taking `a_i` whenever it still fits. Returns `None`
/// when a non-zero residue remains, i.e. `target` is not a subset sum.
pub fn solve_superincreasing_subset_sum(seq: &SuperIncreasingSeq, target: &BigUint) -> Option<BitVector> {
    let mut residue = target.clone();
    let mut bits = vec![false; seq.len()];
    for i in (0..seq.len()).rev() {
        let term = &seq.as_slice()[i];
        if residue >= *term {
            bits[i] = true;
            residue -= term;
        }
    }
    if residue.is_zero() {
        Some(BitVector::new(bits).expect("sequence is non-empty"))
    } else {
        None
    }
}

/// Result of the divisibility-based subset-product solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetProduct {
    pub bits: BitVector,
    /// Whether the selected terms multiply back to exactly the target.
    pub exact: bool,
}

/// Subset-product solver for pairwise coprime terms: `x_i = 1` iff `a_i | d`.
pub fn solve_coprime_subset_product(terms: &[BigUint], d: &BigUint) -> SubsetProduct {
    assert!(!terms.is_empty(), "subset product over an empty sequence");
    let bits: Vec<bool> = terms
        .iter()
        .map(|a| !d.is_zero() && (d % a).is_zero())
        .collect();
    let product: BigUint = terms
        .iter()
        .zip(&bits)
        .filter(|(_, &b)| b)
        .map(|(a, _)| a)
        .product();
    SubsetProduct {
        bits: BitVector::new(bits).expect("terms are non-empty"),
        exact: product == *d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn bits(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn validates_definition() {
        assert!(SuperIncreasingSeq::from_u64s(&[2, 3, 6, 12, 24]).is_ok());
        assert!(SuperIncreasingSeq::from_u64s(&[2, 3, 5]).is_err());
        assert!(SuperIncreasingSeq::from_u64s(&[0, 3]).is_err());
        assert!(SuperIncreasingSeq::from_u64s(&[]).is_err());
        assert!(SuperIncreasingSeq::from_u64s(&[7]).is_ok());
    }

    #[test]
    fn greedy_on_small_sequence() {
        let seq = SuperIncreasingSeq::from_u64s(&[2, 3, 6, 12, 24]).unwrap();
        // Brute force over all 32 subsets: only {3, 12} sums to 15.
        let hits: Vec<u64> = (0u64..32)
            .filter(|m| (0..5).filter(|i| m >> i & 1 == 1).map(|i| [2, 3, 6, 12, 24][i]).sum::<u64>() == 15)
            .collect();
        assert_eq!(hits, vec![0b01010]);
        assert_eq!(solve_superincreasing_subset_sum(&seq, &big(15)), Some(bits("01010")));
        assert_eq!(solve_superincreasing_subset_sum(&seq, &big(0)), Some(bits("00000")));
        assert_eq!(solve_superincreasing_subset_sum(&seq, &big(47)), Some(bits("11111")));
        assert_eq!(solve_superincreasing_subset_sum(&seq, &big(4)), None);
        assert_eq!(solve_superincreasing_subset_sum(&seq, &big(48)), None);
    }

    #[test]
    fn coprime_product_examples() {
        let primes: Vec<BigUint> = [2u64, 3, 5, 7, 11].iter().map(|&p| big(p)).collect();
        let sol = solve_coprime_subset_product(&primes, &big(110));
        assert_eq!(sol, SubsetProduct { bits: bits("10101"), exact: true });
        let sol = solve_coprime_subset_product(&primes, &big(1));
        assert_eq!(sol, SubsetProduct { bits: bits("00000"), exact: true });
        let small: Vec<BigUint> = [2u64, 3, 5].iter().map(|&p| big(p)).collect();
        let sol = solve_coprime_subset_product(&small, &big(12));
        assert_eq!(sol, SubsetProduct { bits: bits("110"), exact: false });
    }

    #[test]
    fn generated_sequences_are_superincreasing() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for draw in 0..1000 {
            let n = 1 + draw % 24;
            let seq = gen_superincreasing(n, &mut rng).unwrap();
            assert_eq!(seq.len(), n);
            let mut sum = BigUint::zero();
            for a in seq.as_slice() {
                assert!(*a >= big(1) && *a > sum);
                sum += a;
            }
        }
    }

    #[test]
    fn coprime_sequences_are_superincreasing_primes() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for n in 1..14 {
            let seq = gen_superincreasing_coprime(n, 4, &mut rng).unwrap();
            assert!(seq
                .as_slice()
                .iter()
                .all(|a| crate::numtheory::is_probable_prime(a, 20)));
        }
    }
}
