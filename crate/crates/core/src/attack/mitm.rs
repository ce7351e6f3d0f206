use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{check_attack_size, recover_hamming_weight, recover_hamming_weight_mod, AttackReport, Strategy};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::modified;
use crate::numtheory::{binomial, entropy_bound, mod_inv, mod_pow};
use crate::original::{Ciphertext, PublicKey};

/// Meet-in-the-middle parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MitmConfig {
    /// Indices `< split` form the left list; `None` means `n / 2`.
    pub split: Option<usize>,
    /// Refuse to build more list entries than this.
    pub max_list_entries: u64,
}

impl Default for MitmConfig {
    fn default() -> Self {
        MitmConfig { split: None, max_list_entries: 1 << 22 }
    }
}

impl MitmConfig {
    fn resolve_split(&self, n: usize) -> Result<usize> {
        let split = self.split.unwrap_or(n / 2);
        if split == 0 || split >= n {
            return Err(Error::Parameter(format!("split must lie in [1, {n}), got {split}")));
        }
        let entries = (1u64 << split) + (1u64 << (n - split));
        if entries > self.max_list_entries {
            return Err(Error::Parameter(format!(
                "lists would hold {entries} entries, above the cap of {}",
                self.max_list_entries
            )));
        }
        Ok(split)
    }
}

/// Subset products `prod_{i in mask} terms[i]`, indexed by mask.
/// `reduce` applies after every multiplication.
fn subset_products(terms: &[&BigUint], reduce: impl Fn(BigUint) -> BigUint) -> Vec<BigUint> {
    let size = 1usize << terms.len();
    let mut out = Vec::with_capacity(size);
    out.push(BigUint::one());
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let prev = &out[mask & (mask - 1)];
        out.push(reduce(prev * terms[low]));
    }
    out
}

pub fn mitm_subset_attack(pk: &PublicKey, ct: &Ciphertext, split: usize) -> Result<AttackReport> {
    mitm_subset_attack_with(pk, ct, &MitmConfig { split: Some(split), ..MitmConfig::default() })
}

/// Birthday-style variant of the subset attack on unreduced ciphertexts.
///
/// The left list maps `(weight, product)` of subsets of the first `split`
/// indices; every right-half subset `B` whose product divides `C2` is matched
/// against `C2 / prod_B` at the complementary weight. The candidate set is
/// identical to the exhaustive search.
pub fn mitm_subset_attack_with(pk: &PublicKey, ct: &Ciphertext, config: &MitmConfig) -> Result<AttackReport> {
    let start = Instant::now();
    let n = pk.n();
    check_attack_size(n)?;
    let split = config.resolve_split(n)?;
    let h = recover_hamming_weight(pk, &ct.c1)?;
    let u: Vec<&BigUint> = pk.u().collect();
    let target = &ct.c2;

    let left = subset_products(&u[..split], |v| v);
    let mut table: HashMap<(u32, &BigUint), Vec<u64>> = HashMap::new();
    for (mask, product) in left.iter().enumerate() {
        let weight = (mask as u64).count_ones();
        if weight as usize <= h && product <= target {
            table.entry((weight, product)).or_default().push(mask as u64);
        }
    }

    let right = subset_products(&u[split..], |v| v);
    let mut hits = Vec::new();
    for (mask, product) in right.iter().enumerate() {
        let weight = (mask as u64).count_ones() as usize;
        if weight > h || h - weight > split || product > target {
            continue;
        }
        if !(target % product).is_zero() {
            continue;
        }
        let quotient = target / product;
        if let Some(lefts) = table.get(&((h - weight) as u32, &quotient)) {
            hits.extend(lefts.iter().map(|&l| l | (mask as u64) << split));
        }
    }

    let mut candidates: Vec<BitVector> = hits.into_iter().map(|m| BitVector::from_mask(m, n)).collect();
    candidates.sort();
    Ok(AttackReport {
        strategy: Strategy::MeetInTheMiddle,
        n,
        recovered_h: h,
        candidates,
        subsets_examined: (left.len() + right.len()) as u64,
        exact_count: binomial(n, h)?,
        predicted_bound: entropy_bound(n, h)?,
        elapsed: start.elapsed(),
    })
}

/// Outcome of the birthday attack on the randomized scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomnessRecovery {
    pub h: usize,
    /// Every weight-`h` randomness whose masked product matches `C1''`.
    pub randomness: Vec<BitVector>,
    /// The plaintext implied by each recovered randomness, in the same order.
    pub messages: Vec<Option<BigUint>>,
    pub list_entries: u64,
}

/// Recovers the encryption randomness of a randomized-scheme ciphertext from
/// public data: `h` from `C1'`, then a two-list search for
/// `prod_A u_i = C1'' (prod_B u_i)^-1 mod p`. With `r` known, the message is
/// `C2^w - h` for `w = r'^-1 mod p - 1`.
pub fn mitm_randomness_attack(
    pk: &modified::PublicKey,
    ct: &modified::Ciphertext,
    config: &MitmConfig,
) -> Result<RandomnessRecovery> {
    let n = pk.n();
    check_attack_size(n)?;
    let split = config.resolve_split(n)?;
    let h = recover_hamming_weight_mod(pk, &ct.c1_prime)?;
    let p = pk.modulus();
    let u: Vec<&BigUint> = pk.u().collect();

    let left = subset_products(&u[..split], |v| v % p);
    let mut table: HashMap<(u32, &BigUint), Vec<u64>> = HashMap::new();
    for (mask, product) in left.iter().enumerate() {
        let weight = (mask as u64).count_ones();
        if weight as usize <= h {
            table.entry((weight, product)).or_default().push(mask as u64);
        }
    }

    let right = subset_products(&u[split..], |v| v % p);
    let mut hits = Vec::new();
    for (mask, product) in right.iter().enumerate() {
        let weight = (mask as u64).count_ones() as usize;
        if weight > h || h - weight > split {
            continue;
        }
        let wanted = &ct.c1_dprime * mod_inv(product, p)? % p;
        if let Some(lefts) = table.get(&((h - weight) as u32, &wanted)) {
            hits.extend(lefts.iter().map(|&l| l | (mask as u64) << split));
        }
    }
    hits.sort_unstable();

    let order = p - 1u32;
    let randomness: Vec<BitVector> = hits.into_iter().map(|m| BitVector::from_mask(m, n)).collect();
    let messages = randomness
        .iter()
        .map(|r| {
            let w = mod_inv(&modified::odd_exponent(r), &order).ok()?;
            let root = mod_pow(&ct.c2, &w, p).ok()?;
            let h = BigUint::from(h);
            (root > h).then(|| root - h)
        })
        .collect();
    Ok(RandomnessRecovery { h, randomness, messages, list_entries: (left.len() + right.len()) as u64 })
}
