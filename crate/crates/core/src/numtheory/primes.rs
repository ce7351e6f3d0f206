use std::collections::HashSet;
use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::arith::mod_pow;
use crate::error::{Error, Result};

/// Miller-Rabin rounds used when callers do not ask for a specific count.
pub const DEFAULT_MR_ROUNDS: usize = 40;

const SIEVE_LIMIT: usize = 4096;

/// Largest bit length for which prime sequences are drawn from an explicit sieve.
const SIEVE_SEQUENCE_BITS: u64 = 22;

/// Primes below `limit`, by the sieve of Eratosthenes.
pub fn primes_below(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit];
    let mut primes = Vec::new();
    for i in 2..limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j < limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn small_primes() -> &'static [u64] {
    static SMALL: OnceLock<Vec<u64>> = OnceLock::new();
    SMALL.get_or_init(|| primes_below(SIEVE_LIMIT))
}

/// Probabilistic primality test.
///
/// Trial division by the primes below 4096 is followed by `rounds` Miller-Rabin
/// rounds. The witnesses are drawn from a generator seeded by `n` itself, so the
/// answer is a pure function of `(n, rounds)`. A `false` answer is certain; a
/// `true` answer is wrong with probability at most `4^-rounds`.
pub fn is_probable_prime(n: &BigUint, rounds: usize) -> bool {
    let rounds = rounds.max(1);
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for &p in small_primes() {
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
        if small < (SIEVE_LIMIT * SIEVE_LIMIT) as u64 {
            return true;
        }
    } else if small_primes().iter().any(|&p| (n % p).is_zero()) {
        return false;
    }

    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().expect("n - 1 is non-zero");
    let d = &n_minus_one >> s;

    let mut seed = [0u8; 32];
    for (slot, byte) in seed.iter_mut().zip(n.to_bytes_le()) {
        *slot = byte;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let two = BigUint::from(2u32);
    let upper = n - &one; // witnesses lie in [2, n - 2]

    'witness: for round in 0..rounds {
        let a = if round == 0 {
            two.clone()
        } else {
            rng.gen_biguint_range(&two, &upper)
        };
        let mut x = mod_pow(&a, &d, n).expect("n > 2");
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A safe prime `p = 2q + 1` together with a generator of the full group mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafePrimeGroup {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
}

impl SafePrimeGroup {
    /// Validates an externally supplied group.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self> {
        if p < BigUint::from(5u32) || p.is_even() {
            return Err(Error::Parameter("safe prime must be odd and at least 5".into()));
        }
        let q: BigUint = (&p - 1u32) >> 1;
        if !is_probable_prime(&p, DEFAULT_MR_ROUNDS) || !is_probable_prime(&q, DEFAULT_MR_ROUNDS) {
            return Err(Error::Parameter("p is not a safe prime".into()));
        }
        let group = SafePrimeGroup { p, q, g };
        if !group.is_generator(&group.g) {
            return Err(Error::Parameter("g does not generate the group".into()));
        }
        Ok(group)
    }

    /// `h` generates Z_p^* iff it has neither order 1, 2 nor q.
    pub fn is_generator(&self, h: &BigUint) -> bool {
        let h = h % &self.p;
        if h.is_zero() {
            return false;
        }
        let two = BigUint::from(2u32);
        !mod_pow(&h, &two, &self.p).expect("p >= 5").is_one()
            && !mod_pow(&h, &self.q, &self.p).expect("p >= 5").is_one()
    }

    /// `p - 1`, the group order.
    pub fn order(&self) -> BigUint {
        &self.p - 1u32
    }
}

fn random_with_bits<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    let mut v = rng.gen_biguint(bits);
    v.set_bit(bits - 1, true);
    v
}

/// Draws a safe prime of exactly `bit_length` bits and a generator for it.
///
/// Candidates `q` are walked upward from a random odd start; both `q` and
/// `2q + 1` are sieved against small primes with word-sized residues before any
/// Miller-Rabin work is done.
pub fn gen_safe_prime<R: Rng + ?Sized>(bit_length: u64, rng: &mut R) -> Result<SafePrimeGroup> {
    if bit_length < 3 {
        return Err(Error::Parameter("safe primes need at least 3 bits".into()));
    }
    if bit_length <= 20 {
        return small_safe_prime(bit_length, rng);
    }
    let q_bits = bit_length - 1;
    let sieve: Vec<u64> = small_primes()[1..].to_vec();
    loop {
        let mut q = random_with_bits(q_bits, rng);
        q.set_bit(0, true);
        let mut residues: Vec<u64> = sieve
            .iter()
            .map(|&s| (&q % s).to_u64().expect("residue fits"))
            .collect();
        // 2^12 steps of 2 stay inside the bit length with overwhelming probability.
        for step in 0..4096u64 {
            let passes = sieve
                .iter()
                .zip(&residues)
                .all(|(&s, &r)| r != 0 && (2 * r + 1) % s != 0);
            if passes {
                let candidate = &q + 2 * step;
                if candidate.bits() != q_bits {
                    break;
                }
                let p = (&candidate << 1u32) + 1u32;
                if is_probable_prime(&candidate, 1)
                    && is_probable_prime(&p, 1)
                    && is_probable_prime(&candidate, DEFAULT_MR_ROUNDS)
                    && is_probable_prime(&p, DEFAULT_MR_ROUNDS)
                {
                    return Ok(with_generator(p, candidate, rng));
                }
            }
            for (r, &s) in residues.iter_mut().zip(&sieve) {
                *r = (*r + 2) % s;
            }
        }
    }
}

fn small_safe_prime<R: Rng + ?Sized>(bit_length: u64, rng: &mut R) -> Result<SafePrimeGroup> {
    let lo = 1u64 << (bit_length - 1);
    let hi = 1u64 << bit_length;
    let primes = primes_below(hi as usize);
    let is_prime: HashSet<u64> = primes.iter().copied().collect();
    let safe: Vec<u64> = primes
        .iter()
        .copied()
        .filter(|&p| p >= lo && p >= 5 && is_prime.contains(&((p - 1) / 2)))
        .collect();
    if safe.is_empty() {
        return Err(Error::Parameter(format!("no safe prime has {bit_length} bits")));
    }
    let p = safe[rng.gen_range(0..safe.len())];
    Ok(with_generator(BigUint::from(p), BigUint::from((p - 1) / 2), rng))
}

fn with_generator<R: Rng + ?Sized>(p: BigUint, q: BigUint, rng: &mut R) -> SafePrimeGroup {
    let mut group = SafePrimeGroup { p, q, g: BigUint::zero() };
    let two = BigUint::from(2u32);
    let upper = &group.p - 1u32;
    loop {
        let g = rng.gen_biguint_range(&two, &upper);
        if group.is_generator(&g) {
            group.g = g;
            return group;
        }
    }
}

/// `n` distinct primes, as drawn by key generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSequence(Vec<BigUint>);

impl PrimeSequence {
    pub fn new(primes: Vec<BigUint>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Parameter("prime sequence is empty".into()));
        }
        let distinct: HashSet<&BigUint> = primes.iter().collect();
        if distinct.len() != primes.len() {
            return Err(Error::Parameter("primes must be pairwise distinct".into()));
        }
        if let Some(bad) = primes.iter().find(|p| !is_probable_prime(p, DEFAULT_MR_ROUNDS)) {
            return Err(Error::Parameter(format!("{bad} is not prime")));
        }
        Ok(PrimeSequence(primes))
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
}

/// Lower bound on the number of primes with exactly `bits` bits, from
/// Rosser-Schoenfeld: `x / ln x < pi(x) < 1.25506 x / ln x` for `x >= 17`.
fn primes_with_bits_lower_bound(bits: u64) -> f64 {
    let hi = 2f64.powi(bits as i32);
    let lo = hi / 2.0;
    hi / hi.ln() - 1.25506 * lo / lo.ln()
}

/// `n` distinct random primes of exactly `bits_each` bits.
///
/// Requests that exceed the number of such primes are refused.
pub fn gen_prime_sequence<R: Rng + ?Sized>(n: usize, bits_each: u64, rng: &mut R) -> Result<PrimeSequence> {
    if n < 2 {
        return Err(Error::Parameter("a prime sequence needs at least 2 primes".into()));
    }
    if bits_each < 2 {
        return Err(Error::Parameter(format!("there are no {bits_each}-bit primes")));
    }
    if bits_each <= SIEVE_SEQUENCE_BITS {
        let lo = 1u64 << (bits_each - 1);
        let pool: Vec<u64> = primes_below(1usize << bits_each)
            .into_iter()
            .filter(|&p| p >= lo)
            .collect();
        if n > pool.len() {
            return Err(Error::Parameter(format!(
                "requested {n} primes of {bits_each} bits but only {} exist",
                pool.len()
            )));
        }
        let chosen = index::sample(rng, pool.len(), n)
            .into_iter()
            .map(|i| BigUint::from(pool[i]))
            .collect();
        return Ok(PrimeSequence(chosen));
    }
    if (n as f64) > primes_with_bits_lower_bound(bits_each) {
        return Err(Error::Parameter(format!("too many {bits_each}-bit primes requested")));
    }
    let mut seen = HashSet::new();
    let mut primes = Vec::with_capacity(n);
    while primes.len() < n {
        let mut candidate = random_with_bits(bits_each, rng);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, DEFAULT_MR_ROUNDS) && seen.insert(candidate.clone()) {
            primes.push(candidate);
        }
    }
    Ok(PrimeSequence(primes))
}

/// Smallest probable prime strictly greater than `n`.
pub fn next_prime(n: &BigUint) -> BigUint {
    let mut candidate = n + 1u32;
    if candidate <= BigUint::from(2u32) {
        return BigUint::from(2u32);
    }
    if candidate.is_even() {
        candidate += 1u32;
    }
    while !is_probable_prime(&candidate, DEFAULT_MR_ROUNDS) {
        candidate += 2u32;
    }
    candidate
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// Safe primes with exactly `bits` bits, straight from a sieve.
    fn sieve_safe_primes(bits: u32) -> Vec<u64> {
        let primes = primes_below(1 << bits);
        primes
            .iter()
            .copied()
            .filter(|&p| p >= 1 << (bits - 1) && p >= 5 && primes.contains(&((p - 1) / 2)))
            .collect()
    }

    #[test]
    fn primality_basics() {
        assert!(is_probable_prime(&big(2579), 40));
        assert!(!is_probable_prime(&big(1), 40));
        assert!(!is_probable_prime(&big(0), 40));
        assert!(is_probable_prime(&big(2), 1));
        assert!(!is_probable_prime(&big(561), 40));
        // Strong pseudoprime to base 2.
        assert!(!is_probable_prime(&big(3_215_031_751), 40));
    }

    #[test]
    fn primality_matches_sieve() {
        let primes: HashSet<u64> = primes_below(100_000).into_iter().collect();
        for n in 0u64..100_000 {
            assert_eq!(is_probable_prime(&big(n), 8), primes.contains(&n), "n = {n}");
        }
    }

    #[test]
    fn product_of_two_32_bit_primes_is_composite() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..20 {
            let seq = gen_prime_sequence(2, 32, &mut rng).unwrap();
            let composite = seq.product();
            assert!(!is_probable_prime(&composite, 40));
            assert!(seq.as_slice().iter().all(|p| is_probable_prime(p, 40)));
        }
    }

    #[test]
    fn eight_bit_safe_primes() {
        let expected = sieve_safe_primes(8);
        assert_eq!(expected, vec![167, 179, 227]);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let group = gen_safe_prime(8, &mut rng).unwrap();
            assert!(expected.contains(&group.p.to_u64().unwrap()));
            assert!(group.is_generator(&group.g));
        }
    }

    #[test]
    fn sixteen_bit_safe_prime() {
        let mut rng = ChaCha20Rng::seed_from_u64(16);
        let group = gen_safe_prime(16, &mut rng).unwrap();
        assert_eq!(group.p.bits(), 16);
        assert_eq!(group.p, &group.q * 2u32 + 1u32);
        assert!(is_probable_prime(&group.p, 40) && is_probable_prime(&group.q, 40));
        assert!(sieve_safe_primes(16).contains(&group.p.to_u64().unwrap()));
    }

    #[test]
    fn large_safe_prime_and_generator_order() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for bits in [64, 128, 200] {
            let group = gen_safe_prime(bits, &mut rng).unwrap();
            assert_eq!(group.p.bits(), bits);
            assert!(is_probable_prime(&group.q, 40));
            assert_eq!(group.p, &group.q * 2u32 + 1u32);
            assert_ne!(mod_pow(&group.g, &group.q, &group.p).unwrap(), big(1));
            assert_ne!(mod_pow(&group.g, &big(2), &group.p).unwrap(), big(1));
            assert_eq!(mod_pow(&group.g, &group.order(), &group.p).unwrap(), big(1));
        }
    }

    #[test]
    fn generator_check_on_known_group() {
        let group = SafePrimeGroup::new(big(2579), big(2)).unwrap();
        assert_eq!(group.q, big(1289));
        assert!(SafePrimeGroup::new(big(2579), big(4)).is_err());
        assert!(SafePrimeGroup::new(big(2581), big(2)).is_err());
    }

    #[test]
    fn prime_sequence_feasibility() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        // Only 11 and 13 have four bits.
        assert!(matches!(gen_prime_sequence(5, 4, &mut rng), Err(Error::Parameter(_))));
        let two = gen_prime_sequence(2, 2, &mut rng).unwrap();
        let mut got: Vec<_> = two.as_slice().to_vec();
        got.sort();
        assert_eq!(got, vec![big(2), big(3)]);
        assert!(gen_prime_sequence(1, 8, &mut rng).is_err());
        assert!(gen_prime_sequence(2, 1, &mut rng).is_err());
    }

    #[test]
    fn prime_sequence_is_distinct_primes_of_requested_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for (n, bits) in [(3, 8), (16, 16), (10, 40)] {
            let seq = gen_prime_sequence(n, bits, &mut rng).unwrap();
            assert_eq!(seq.len(), n);
            assert!(PrimeSequence::new(seq.as_slice().to_vec()).is_ok());
            assert!(seq.as_slice().iter().all(|p| p.bits() == bits));
        }
    }

    #[test]
    fn next_prime_steps() {
        assert_eq!(next_prime(&big(0)), big(2));
        assert_eq!(next_prime(&big(2)), big(3));
        assert_eq!(next_prime(&big(24)), big(29));
        assert_eq!(next_prime(&big(29)), big(31));
    }
}
