//! The original deterministic ElGamal/multiplicative-knapsack scheme.
//!
//! Key generation disguises a super-increasing sequence `a_i` as
//! `u_i = y^k a_i mod p` next to the constant `s_i = g^k mod p`. Encryption
//! multiplies the selected pairs *without* reducing modulo `p`, and decryption
//! recovers `d = C2 (C1^x)^-1 mod p`, which equals `prod a_i^{m_i}` only when
//! `p` exceeds that product. The scheme is implemented with all of its defects
//! intact because it is the target of the attacks in [`crate::attack`].

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::numtheory::{
    gen_safe_prime, gen_superincreasing_coprime, gen_superincreasing_with, is_probable_prime,
    mod_inv, mod_pow, random_between, SequenceParams, SuperIncreasingSeq, DEFAULT_MR_ROUNDS,
};

/// Largest `n` accepted by [`decrypt_all`].
pub const DECRYPT_ALL_LIMIT: usize = 40;

/// Default bound on `n` for [`completeness_audit`].
pub const DEFAULT_AUDIT_LIMIT: usize = 20;

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

    /// The common value `s = g^k mod p`.
    pub fn s(&self) -> &BigUint {
        &self.pairs[0].0
    }

    pub fn u(&self) -> impl Iterator<Item = &BigUint> {
        self.pairs.iter().map(|(_, u)| u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub p: BigUint,
    pub g: BigUint,
    pub y: BigUint,
    pub x: BigUint,
    pub k: BigUint,
    pub a: SuperIncreasingSeq,
}

impl SecretKey {
    /// Assembles a key from chosen parameters, computing `y = g^x mod p`.
    pub fn from_parts(p: BigUint, g: BigUint, x: BigUint, k: BigUint, a: SuperIncreasingSeq) -> Result<Self> {
        let y = mod_pow(&g, &x, &p)?;
        Self::new(p, g, y, x, k, a)
    }

    pub fn new(p: BigUint, g: BigUint, y: BigUint, x: BigUint, k: BigUint, a: SuperIncreasingSeq) -> Result<Self> {
        if !is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
            return Err(Error::InvalidKey("p is not prime".into()));
        }
        if a.len() < 2 {
            return Err(Error::InvalidKey("need at least two sequence terms".into()));
        }
        let p_minus_two = &p - 2u32;
        for (name, e) in [("x", &x), ("k", &k)] {
            if e.is_zero() || *e > p_minus_two {
                return Err(Error::InvalidKey(format!("{name} must lie in [1, p-2]")));
            }
        }
        if g.is_zero() || g >= p {
            return Err(Error::InvalidKey("g must lie in [1, p)".into()));
        }
        if mod_pow(&g, &x, &p)? != y {
            return Err(Error::InvalidKey("y != g^x mod p".into()));
        }
        Ok(SecretKey { p, g, y, x, k, a })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// `s_i = g^k`, `u_i = y^k a_i` (mod p).
    pub fn public_key(&self) -> PublicKey {
        let s = mod_pow(&self.g, &self.k, &self.p).expect("p is prime");
        let mask = mod_pow(&self.y, &self.k, &self.p).expect("p is prime");
        let pairs = self
            .a
            .as_slice()
            .iter()
            .map(|a| (s.clone(), &mask * a % &self.p))
            .collect();
        PublicKey { p: self.p.clone(), pairs }
    }

    /// Whether `p >= prod a_i`, the condition under which decryption works.
    pub fn modulus_covers_products(&self) -> bool {
        self.p >= self.a.product()
    }
}

/// Key-generation parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyParams {
    pub n: usize,
    /// Bit length of `p`; `None` picks the smallest length above `prod a_i`.
    pub modulus_bits: Option<u64>,
    pub sequence: SequenceParams,
    /// Draw the `a_i` as super-increasing primes instead of arbitrary integers.
    pub coprime: bool,
    /// Permit `p < prod a_i`, reproducing the overflow failure.
    pub allow_overflow: bool,
}

impl KeyParams {
    pub fn new(n: usize) -> Self {
        KeyParams {
            n,
            modulus_bits: None,
            sequence: SequenceParams::default(),
            coprime: false,
            allow_overflow: false,
        }
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &KeyParams, rng: &mut R) -> Result<(PublicKey, SecretKey)> {
    if params.n < 2 {
        return Err(Error::Parameter("n must be at least 2".into()));
    }
    let a = if params.coprime {
        gen_superincreasing_coprime(params.n, params.sequence.first_bits, rng)?
    } else {
        gen_superincreasing_with(params.n, params.sequence, rng)?
    };
    let product = a.product();
    let bits = match params.modulus_bits {
        None => product.bits() + 1,
        Some(bits) => {
            // Every `bits`-bit prime is at least 2^(bits-1).
            if !params.allow_overflow && (BigUint::one() << bits.saturating_sub(1)) < product {
                return Err(Error::Parameter(format!(
                    "a {bits}-bit modulus cannot exceed the {}-bit product of the sequence",
                    product.bits()
                )));
            }
            bits
        }
    };
    let group = gen_safe_prime(bits.max(3), rng)?;
    let one = BigUint::one();
    let top = &group.p - 2u32;
    let x = random_between(&one, &top, rng);
    let k = random_between(&one, &top, rng);
    let sk = SecretKey::from_parts(group.p, group.g, x, k, a)?;
    Ok((sk.public_key(), sk))
}

/// Unreduced ciphertext `(C1, C2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub c1: BigUint,
    pub c2: BigUint,
}

/// `C = prod (s_i, u_i)^{m_i}`, computed over the integers.
pub fn encrypt(pk: &PublicKey, m: &BitVector) -> Result<Ciphertext> {
    if m.len() != pk.n() {
        return Err(Error::LengthMismatch { expected: pk.n(), actual: m.len() });
    }
    if m.is_zero() {
        return Err(Error::ZeroMessage);
    }
    let (mut c1, mut c2) = (BigUint::one(), BigUint::one());
    for ((s, u), bit) in pk.pairs.iter().zip(m.iter()) {
        if bit {
            c1 *= s;
            c2 *= u;
        }
    }
    Ok(Ciphertext { c1, c2 })
}

/// `d = C2 (C1^x)^-1 mod p`.
pub fn decrypt_d(sk: &SecretKey, ct: &Ciphertext) -> Result<BigUint> {
    let mask = mod_pow(&ct.c1, &sk.x, &sk.p)?;
    let inv = mod_inv(&mask, &sk.p)?;
    Ok(&ct.c2 * inv % &sk.p)
}

/// Every non-empty subset of the `a_i` whose product is exactly `d`, in
/// canonical (lexicographic) order. No result means decryption failed; more
/// than one means the ciphertext is ambiguous.
pub fn decrypt_all(sk: &SecretKey, ct: &Ciphertext) -> Result<Vec<BitVector>> {
    if sk.n() > DECRYPT_ALL_LIMIT {
        return Err(Error::TooLarge { n: sk.n(), limit: DECRYPT_ALL_LIMIT });
    }
    let d = decrypt_d(sk, ct)?;
    let mut found = subset_product_solutions(sk.a.as_slice(), &d);
    found.sort();
    Ok(found)
}

/// Exhaustive subset-product search with divisibility pruning.
fn subset_product_solutions(terms: &[BigUint], d: &BigUint) -> Vec<BitVector> {
    let mut out = Vec::new();
    if d.is_zero() {
        return out;
    }
    let mut chosen = vec![false; terms.len()];
    search(terms, terms.len(), d, &mut chosen, &mut out);
    out.retain(|v| !v.is_zero());
    out
}

fn search(terms: &[BigUint], i: usize, rest: &BigUint, chosen: &mut Vec<bool>, out: &mut Vec<BitVector>) {
    if i == 0 {
        if rest.is_one() {
            out.push(BitVector::new(chosen.clone()).expect("non-empty"));
        }
        return;
    }
    let a = &terms[i - 1];
    if (rest % a).is_zero() {
        chosen[i - 1] = true;
        search(terms, i - 1, &(rest / a), chosen, out);
        chosen[i - 1] = false;
    }
    search(terms, i - 1, rest, chosen, out);
}

/// Messages whose subset products coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub product: BigUint,
    pub messages: Vec<BitVector>,
}

/// Result of scanning the whole message space of a key.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub n: usize,
    /// Non-zero messages scanned (`2^n - 1`).
    pub messages: u64,
    pub collisions: Vec<Collision>,
    /// Messages whose product `prod a_i^{m_i}` is at least `p`.
    pub overflows: Vec<BitVector>,
    /// Messages for which `decrypt_all(encrypt(m)) == {m}`.
    pub unique: u64,
}

impl AuditReport {
    pub fn unique_fraction(&self) -> f64 {
        self.unique as f64 / self.messages as f64
    }

    /// Every unordered pair of distinct messages sharing a product.
    pub fn collision_pairs(&self) -> impl Iterator<Item = (&BitVector, &BitVector)> {
        self.collisions.iter().flat_map(|c| {
            c.messages
                .iter()
                .enumerate()
                .flat_map(move |(i, a)| c.messages[i + 1..].iter().map(move |b| (a, b)))
        })
    }

    pub fn is_clean(&self) -> bool {
        self.collisions.is_empty() && self.overflows.is_empty()
    }
}

/// Scans all `2^n - 1` non-zero messages for product collisions and modulus
/// overflows.
///
/// Decryption of `m` yields `d = P(m) mod p` with `P(m) = prod a_i^{m_i}`, so
/// `m` decrypts uniquely exactly when `P(m) < p` and no other message shares
/// `P(m)`.
pub fn completeness_audit(sk: &SecretKey, pk: &PublicKey, exhaustive_limit: usize) -> Result<AuditReport> {
    let n = sk.n();
    if n > exhaustive_limit || n > 30 {
        return Err(Error::TooLarge { n, limit: exhaustive_limit.min(30) });
    }
    if sk.public_key() != *pk {
        return Err(Error::InvalidKey("public key does not belong to the secret key".into()));
    }
    let a = sk.a.as_slice();
    let size = 1usize << n;
    let mut products = vec![BigUint::one(); size];
    let mut by_product: HashMap<BigUint, Vec<u64>> = HashMap::new();
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        products[mask] = &products[mask & (mask - 1)] * &a[low];
        by_product.entry(products[mask].clone()).or_default().push(mask as u64);
    }

    let mut collisions: Vec<Collision> = by_product
        .iter()
        .filter(|(_, masks)| masks.len() > 1)
        .map(|(product, masks)| {
            let mut messages: Vec<BitVector> = masks.iter().map(|&m| BitVector::from_mask(m, n)).collect();
            messages.sort();
            Collision { product: product.clone(), messages }
        })
        .collect();
    collisions.sort_by(|x, y| x.product.cmp(&y.product));

    let mut overflows = Vec::new();
    let mut unique = 0u64;
    for (mask, product) in products.iter().enumerate().skip(1) {
        if *product >= sk.p {
            overflows.push(BitVector::from_mask(mask as u64, n));
        } else if by_product[product].len() == 1 {
            unique += 1;
        }
    }
    overflows.sort();
    Ok(AuditReport { n, messages: (size - 1) as u64, collisions, overflows, unique })
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

    fn toy_key() -> SecretKey {
        SecretKey::from_parts(
            big(2579),
            big(2),
            big(1500),
            big(348),
            SuperIncreasingSeq::from_u64s(&[2, 3, 6, 12, 24]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn toy_key_values() {
        let sk = toy_key();
        assert_eq!(sk.y, big(862));
        let pk = sk.public_key();
        assert!(pk.pairs().iter().all(|(s, _)| *s == big(104)));
        let u: Vec<_> = pk.u().cloned().collect();
        assert_eq!(u, [2165u64, 1958, 1337, 95, 190].map(big).to_vec());
    }

    #[test]
    fn key_equation_inverts() {
        let sk = toy_key();
        let pk = sk.public_key();
        let mask_inv = mod_inv(&mod_pow(&sk.y, &sk.k, &sk.p).unwrap(), &sk.p).unwrap();
        for (u, a) in pk.u().zip(sk.a.as_slice()) {
            assert_eq!(u * &mask_inv % &sk.p, *a);
        }
    }

    #[test]
    fn encrypt_toy_messages() {
        let pk = toy_key().public_key();
        let ct = encrypt(&pk, &bits("01001")).unwrap();
        assert_eq!(ct, Ciphertext { c1: big(10816), c2: big(372020) });
        let ct = encrypt(&pk, &bits("01111")).unwrap();
        assert_eq!(ct.c1, big(116_985_856));
        assert_eq!(ct.c2, big(1958 * 1337 * 95 * 190));
        let ct = encrypt(&pk, &bits("00100")).unwrap();
        assert_eq!(ct, Ciphertext { c1: big(104), c2: big(1337) });
    }

    #[test]
    fn encrypt_rejects_bad_messages() {
        let pk = toy_key().public_key();
        assert_eq!(encrypt(&pk, &bits("0100")), Err(Error::LengthMismatch { expected: 5, actual: 4 }));
        assert_eq!(encrypt(&pk, &bits("00000")), Err(Error::ZeroMessage));
    }

    #[test]
    fn encryption_is_deterministic() {
        let pk = toy_key().public_key();
        let m = bits("10110");
        assert_eq!(encrypt(&pk, &m).unwrap(), encrypt(&pk, &m).unwrap());
    }

    #[test]
    fn toy_decryption_is_ambiguous() {
        let sk = toy_key();
        let ct = Ciphertext { c1: big(10816), c2: big(372020) };
        assert_eq!(decrypt_d(&sk, &ct).unwrap(), big(72));
        // Brute force over all 31 non-empty subsets of (2, 3, 6, 12, 24).
        let oracle: Vec<BitVector> = (1u64..32)
            .filter(|mask| (0..5).filter(|i| mask >> i & 1 == 1).map(|i| [2u64, 3, 6, 12, 24][i]).product::<u64>() == 72)
            .map(|mask| BitVector::from_mask(mask, 5))
            .collect();
        let mut oracle = oracle;
        oracle.sort();
        // 72 = 3 * 24 = 6 * 12 = 2 * 3 * 12.
        assert_eq!(oracle, vec![bits("00110"), bits("01001"), bits("11010")]);
        assert_eq!(decrypt_all(&sk, &ct).unwrap(), oracle);
    }

    #[test]
    fn toy_overflow_breaks_decryption() {
        let sk = toy_key();
        let ct = encrypt(&sk.public_key(), &bits("01111")).unwrap();
        let d = decrypt_d(&sk, &ct).unwrap();
        assert_ne!(d, big(5184));
        assert_eq!(d, big(5184 % 2579));
        assert!(decrypt_all(&sk, &ct).unwrap().is_empty());
    }

    #[test]
    fn decrypt_d_rejects_non_invertible() {
        let sk = toy_key();
        let ct = Ciphertext { c1: big(2579 * 3), c2: big(5) };
        assert_eq!(decrypt_d(&sk, &ct), Err(Error::NoInverse));
    }

    #[test]
    fn audit_on_toy_key() {
        let sk = toy_key();
        let report = completeness_audit(&sk, &sk.public_key(), DEFAULT_AUDIT_LIMIT).unwrap();
        assert_eq!(report.messages, 31);
        assert!(report.collision_pairs().any(|(a, b)| *a == bits("00110") && *b == bits("01001")));
        assert!(report.overflows.contains(&bits("01111")));

        // Independent count: run the real encrypt/decrypt pipeline on every message.
        let pk = sk.public_key();
        let unique = (1u64..32)
            .map(|mask| BitVector::from_mask(mask, 5))
            .filter(|m| decrypt_all(&sk, &encrypt(&pk, m).unwrap()).unwrap() == vec![m.clone()])
            .count() as u64;
        assert_eq!(report.unique, unique);
        let overflowing = (1u64..32)
            .filter(|mask| {
                let p: u64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| [2u64, 3, 6, 12, 24][i]).product();
                p >= 2579
            })
            .count();
        assert_eq!(report.overflows.len(), overflowing);
        assert!(report.unique_fraction() < 1.0);
    }

    #[test]
    fn audit_refuses_large_n() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (pk, sk) = keygen(&KeyParams::new(6), &mut rng).unwrap();
        assert!(matches!(completeness_audit(&sk, &pk, 5), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn coprime_keys_decrypt_uniquely() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for n in 2..=10 {
            let mut params = KeyParams::new(n);
            params.coprime = true;
            let (pk, sk) = keygen(&params, &mut rng).unwrap();
            let report = completeness_audit(&sk, &pk, DEFAULT_AUDIT_LIMIT).unwrap();
            assert!(report.is_clean());
            assert_eq!(report.unique, report.messages);
            for mask in 1u64..(1 << n) {
                let m = BitVector::from_mask(mask, n);
                let ct = encrypt(&pk, &m).unwrap();
                assert_eq!(decrypt_all(&sk, &ct).unwrap(), vec![m]);
            }
        }
    }

    #[test]
    fn keygen_invariants() {
        let mut rng = ChaCha20Rng::seed_from_u64(100);
        for _ in 0..100 {
            let (pk, sk) = keygen(&KeyParams::new(8), &mut rng).unwrap();
            assert_eq!(sk.y, mod_pow(&sk.g, &sk.x, &sk.p).unwrap());
            assert!(sk.modulus_covers_products());
            assert_eq!(pk.n(), 8);
            assert!(pk.pairs().iter().all(|(s, u)| s == pk.s() && *u < sk.p && !u.is_zero()));
            let mask = mod_pow(&sk.y, &sk.k, &sk.p).unwrap();
            for (u, a) in pk.u().zip(sk.a.as_slice()) {
                assert_eq!(*u, &mask * a % &sk.p);
            }
        }
    }

    #[test]
    fn decrypt_d_recovers_product_when_modulus_is_large() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for n in 2..=12 {
            let (pk, sk) = keygen(&KeyParams::new(n), &mut rng).unwrap();
            for mask in 1u64..(1 << n) {
                let m = BitVector::from_mask(mask, n);
                let direct: BigUint = m.ones_indices().map(|i| &sk.a.as_slice()[i]).product();
                assert_eq!(decrypt_d(&sk, &encrypt(&pk, &m).unwrap()).unwrap(), direct);
            }
        }
    }

    #[test]
    fn undersized_modulus_is_refused_unless_allowed() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut params = KeyParams::new(6);
        params.modulus_bits = Some(8);
        assert!(matches!(keygen(&params, &mut rng), Err(Error::Parameter(_))));
        params.allow_overflow = true;
        let (_, sk) = keygen(&params, &mut rng).unwrap();
        assert!(!sk.modulus_covers_products());
    }

    #[test]
    fn public_key_validation() {
        let p = big(2579);
        assert!(PublicKey::new(p.clone(), vec![(big(104), big(5)), (big(103), big(6))]).is_err());
        assert!(PublicKey::new(p.clone(), vec![(big(104), big(0)), (big(104), big(6))]).is_err());
        assert!(PublicKey::new(p.clone(), vec![(big(104), big(5))]).is_err());
        assert!(PublicKey::new(p, vec![(big(104), big(5)), (big(104), big(6))]).is_ok());
    }
}
