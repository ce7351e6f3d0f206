//! The randomized variant with consistency-checked decryption.
//!
//! Keys hide `n` distinct primes `p_i` as `u_i = y^k p_i mod p` over a safe
//! prime `p > prod p_i`. Encryption draws fresh bits `r`, publishes
//! `C1 = prod (s_i, u_i)^{r_i} mod p` and `C2 = (m + h)^{r'} mod p`, where `h`
//! is the weight of `r` and `r'` is the integer `r` bumped to the next odd
//! value. Decryption strips the mask from `C1''`, factors out `r` by trial
//! division, and re-checks both components before releasing a message.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::numtheory::{
    gcd, gen_prime_sequence, gen_safe_prime, is_probable_prime, mod_inv, mod_pow, random_between,
    solve_coprime_subset_product, PrimeSequence, DEFAULT_MR_ROUNDS,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    p: BigUint,
    pairs: Vec<(BigUint, BigUint)>,
}

impl PublicKey {
    pub fn new(p: BigUint, pairs: Vec<(BigUint, BigUint)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InvalidKey("need at least two knapsack pairs".into()));
        }
        if p < BigUint::from(5u32) || !is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidKey("p is not prime".into()));
        }
        if !is_probable_prime(&((&p - 1u32) >> 1), DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidKey("p is not a safe prime".into()));
        }
        let s = &pairs[0].0;
        for (si, ui) in &pairs {
            if si != s {
                return Err(Error::InvalidKey("s_i must all be equal".into()));
            }
            if si.is_zero() || ui.is_zero() || *si >= p || *ui >= p {
                return Err(Error::InvalidKey("pair entries must lie in [1, p)".into()));
            }
        }
        Ok(PublicKey { p, pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn pairs(&self) -> &[(BigUint, BigUint)] {
        &self.pairs
    }

    pub fn s(&self) -> &BigUint {
        &self.pairs[0].0
    }

    pub fn u(&self) -> impl Iterator<Item = &BigUint> {
        self.pairs.iter().map(|(_, u)| u)
    }

    /// Largest admissible plaintext, `p - n - 1`.
    pub fn max_message(&self) -> BigUint {
        &self.p - self.n() - 1u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub p: BigUint,
    pub g: BigUint,
    pub y: BigUint,
    pub x: BigUint,
    pub k: BigUint,
    pub primes: PrimeSequence,
}

impl SecretKey {
    pub fn new(p: BigUint, g: BigUint, y: BigUint, x: BigUint, k: BigUint, primes: PrimeSequence) -> Result<Self> {
        if primes.len() < 2 {
            return Err(Error::InvalidKey("need at least two primes".into()));
        }
        if p <= primes.product() {
            return Err(Error::InvalidKey("p must exceed the product of the primes".into()));
        }
        if !is_probable_prime(&p, DEFAULT_MR_ROUNDS) || !is_probable_prime(&((&p - 1u32) >> 1), DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidKey("p is not a safe prime".into()));
        }
        let order = &p - 1u32;
        if !gcd(&k, &order).is_one() {
            return Err(Error::InvalidKey("gcd(k, p-1) must be 1".into()));
        }
        if x.is_zero() || k.is_zero() || x >= order || k >= order {
            return Err(Error::InvalidKey("x and k must lie in [1, p-2]".into()));
        }
        if mod_pow(&g, &x, &p)? != y {
            return Err(Error::InvalidKey("y != g^x mod p".into()));
        }
        Ok(SecretKey { p, g, y, x, k, primes })
    }

    pub fn n(&self) -> usize {
        self.primes.len()
    }

    pub fn public_key(&self) -> PublicKey {
        let s = mod_pow(&self.g, &self.k, &self.p).expect("p is prime");
        let mask = mod_pow(&self.y, &self.k, &self.p).expect("p is prime");
        let pairs = self
            .primes
            .as_slice()
            .iter()
            .map(|pi| (s.clone(), &mask * pi % &self.p))
            .collect();
        PublicKey { p: self.p.clone(), pairs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyParams {
    pub n: usize,
    /// Bit length of each hidden prime `p_i`.
    pub prime_bits: u64,
    /// Bit length of `p`; `None` picks the smallest admissible length.
    pub modulus_bits: Option<u64>,
}

impl KeyParams {
    pub fn new(n: usize, prime_bits: u64) -> Self {
        KeyParams { n, prime_bits, modulus_bits: None }
    }

    /// Smallest bit length of `p` that exceeds `product` and keeps `n + 1`
    /// below the bit length of `q`, so every odd `r'` is invertible mod `p - 1`.
    fn min_modulus_bits(&self, product: &BigUint) -> u64 {
        (product.bits() + 1).max(self.n as u64 + 3)
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &KeyParams, rng: &mut R) -> Result<(PublicKey, SecretKey)> {
    if params.n < 2 {
        return Err(Error::Parameter("n must be at least 2".into()));
    }
    let primes = gen_prime_sequence(params.n, params.prime_bits, rng)?;
    let needed = params.min_modulus_bits(&primes.product());
    let bits = match params.modulus_bits {
        Some(bits) if bits < needed => {
            return Err(Error::Parameter(format!("modulus needs at least {needed} bits, got {bits}")));
        }
        Some(bits) => bits,
        None => needed,
    };
    let group = gen_safe_prime(bits, rng)?;
    let order = group.order();
    let lo = BigUint::from(2u32);
    let hi = &group.p - 3u32;
    let x = random_between(&lo, &hi, rng);
    let k = loop {
        let k = random_between(&lo, &hi, rng);
        if gcd(&k, &order).is_one() {
            break k;
        }
    };
    let y = mod_pow(&group.g, &x, &group.p)?;
    let sk = SecretKey::new(group.p, group.g, y, x, k, primes)?;
    Ok((sk.public_key(), sk))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub c1_prime: BigUint,
    pub c1_dprime: BigUint,
    pub c2: BigUint,
}

impl Ciphertext {
    /// Component `0` is `C1'`, `1` is `C1''`, `2` is `C2`.
    pub fn component_mut(&mut self, index: usize) -> &mut BigUint {
        match index {
            0 => &mut self.c1_prime,
            1 => &mut self.c1_dprime,
            2 => &mut self.c2,
            _ => panic!("ciphertext has three components, got index {index}"),
        }
    }

    pub fn component(&self, index: usize) -> &BigUint {
        [&self.c1_prime, &self.c1_dprime, &self.c2][index]
    }
}

/// `r'`: the integer value of `r`, plus one when even.
pub fn odd_exponent(r: &BitVector) -> BigUint {
    let value = r.to_biguint();
    if value.is_even() {
        value + 1u32
    } else {
        value
    }
}

fn check_message(pk: &PublicKey, m: &BigUint) -> Result<()> {
    if m.is_zero() || *m > pk.max_message() {
        Err(Error::MessageOutOfRange)
    } else {
        Ok(())
    }
}

/// Uniform `n`-bit randomness other than the integers 0 and 1.
pub fn sample_randomness<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitVector {
    loop {
        let r = BitVector::random(n, rng).expect("n >= 2");
        if r.to_biguint() > BigUint::one() {
            return r;
        }
    }
}

pub fn encrypt<R: Rng + ?Sized>(pk: &PublicKey, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
    check_message(pk, m)?;
    let r = sample_randomness(pk.n(), rng);
    encrypt_with_randomness(pk, m, &r)
}

/// Encryption with caller-supplied randomness `r`.
pub fn encrypt_with_randomness(pk: &PublicKey, m: &BigUint, r: &BitVector) -> Result<Ciphertext> {
    check_message(pk, m)?;
    if r.len() != pk.n() {
        return Err(Error::LengthMismatch { expected: pk.n(), actual: r.len() });
    }
    if r.to_biguint() <= BigUint::one() {
        return Err(Error::Parameter("randomness must not be the integer 0 or 1".into()));
    }
    let (c1_prime, c1_dprime) = mask_randomness(pk, r);
    let h = r.weight();
    let c2 = mod_pow(&(m + h), &odd_exponent(r), &pk.p)?;
    Ok(Ciphertext { c1_prime, c1_dprime, c2 })
}

/// `prod (s_i, u_i)^{r_i} mod p`.
pub fn mask_randomness(pk: &PublicKey, r: &BitVector) -> (BigUint, BigUint) {
    let (mut c1, mut c1d) = (BigUint::one(), BigUint::one());
    for ((s, u), bit) in pk.pairs.iter().zip(r.iter()) {
        if bit {
            c1 = c1 * s % &pk.p;
            c1d = c1d * u % &pk.p;
        }
    }
    (c1, c1d)
}

/// Recovers `(r, h)` from `C1`: `d = C1'' (C1'^x)^-1 mod p`, then
/// `r_i = 1` iff `p_i | d`.
pub fn recover_randomness(sk: &SecretKey, c1_prime: &BigUint, c1_dprime: &BigUint) -> Result<(BitVector, usize)> {
    let unmask = mod_pow(c1_prime, &sk.x, &sk.p)?;
    let inv = mod_inv(&unmask, &sk.p).map_err(|_| Error::MalformedCiphertext("C1' is not invertible".into()))?;
    let d = c1_dprime * inv % &sk.p;
    let r = solve_coprime_subset_product(sk.primes.as_slice(), &d).bits;
    let h = r.weight();
    Ok((r, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// `C1''` does not match the recovered randomness.
    RandomnessInconsistent,
    /// `C2` does not re-encrypt from the recovered message, or the message
    /// falls outside `[1, p - n - 1]`.
    MessageInconsistent,
    /// A component lies outside `[1, p)` or `C1'` is not invertible.
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecryptOutcome {
    Message(BigUint),
    Rejected(RejectReason),
}

impl DecryptOutcome {
    pub fn message(&self) -> Option<&BigUint> {
        match self {
            DecryptOutcome::Message(m) => Some(m),
            DecryptOutcome::Rejected(_) => None,
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, DecryptOutcome::Rejected(_))
    }
}

pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> DecryptOutcome {
    use DecryptOutcome::Rejected;
    let p = &sk.p;
    let in_range = |v: &BigUint| !v.is_zero() && v < p;
    if !(in_range(&ct.c1_prime) && in_range(&ct.c1_dprime) && in_range(&ct.c2)) {
        return Rejected(RejectReason::Malformed);
    }
    let (r, h) = match recover_randomness(sk, &ct.c1_prime, &ct.c1_dprime) {
        Ok(found) => found,
        Err(_) => return Rejected(RejectReason::Malformed),
    };

    let expected_c1d = sk
        .primes
        .as_slice()
        .iter()
        .zip(r.iter())
        .filter(|(_, bit)| *bit)
        .fold(mod_pow(&sk.y, &(&sk.k * h), p).expect("p is prime"), |acc, (pi, _)| acc * pi % p);
    if expected_c1d != ct.c1_dprime {
        return Rejected(RejectReason::RandomnessInconsistent);
    }

    let r_odd = odd_exponent(&r);
    let w = match mod_inv(&r_odd, &(p - 1u32)) {
        Ok(w) => w,
        Err(_) => return Rejected(RejectReason::Malformed),
    };
    let root = mod_pow(&ct.c2, &w, p).expect("p is prime");
    let h_big = BigUint::from(h);
    if root < h_big {
        return Rejected(RejectReason::MessageInconsistent);
    }
    let m = root - &h_big;
    if mod_pow(&(&m + &h_big), &r_odd, p).expect("p is prime") != ct.c2 {
        return Rejected(RejectReason::MessageInconsistent);
    }
    let max_message = p - sk.n() - 1u32;
    if m.is_zero() || m > max_message {
        return Rejected(RejectReason::MessageInconsistent);
    }
    DecryptOutcome::Message(m)
}
