use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{ModifiedScheme, Scheme};
use crate::attack::recover_hamming_weight_mod;
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::modified::{self, Ciphertext, PublicKey};

/// Each component of `(C1', C1'', C2)` on its own.
pub const SINGLE_COMPONENT_PATTERNS: [&[usize]; 3] = [&[0], &[1], &[2]];

/// Every pair of components.
pub const PAIRWISE_PATTERNS: [&[usize]; 3] = [&[0, 1], &[0, 2], &[1, 2]];

fn random_unit_except(p: &BigUint, avoid: &BigUint, rng: &mut dyn RngCore) -> BigUint {
    loop {
        let v = rng.gen_biguint_range(&BigUint::one(), p);
        if v != *avoid {
            return v;
        }
    }
}

/// Keeps `C1*` and draws `C2` uniformly from `[1, p)`, never equal to `C2*`.
pub fn malleation_case1(challenge: &Ciphertext, pk: &PublicKey, rng: &mut dyn RngCore) -> Ciphertext {
    Ciphertext { c2: random_unit_except(pk.modulus(), &challenge.c2, rng), ..challenge.clone() }
}

/// Keeps `C2*` and substitutes the `C1` an honest encryption would produce
/// under fresh randomness. With `match_weight` the fresh randomness has the
/// challenge's Hamming weight, which the public `C1'` reveals.
pub fn malleation_case2(challenge: &Ciphertext, pk: &PublicKey, match_weight: bool, rng: &mut dyn RngCore) -> Ciphertext {
    let n = pk.n();
    let weight = if match_weight { recover_hamming_weight_mod(pk, &challenge.c1_prime).ok() } else { None };
    loop {
        let r = match weight {
            Some(h) => {
                let picked = rand::seq::index::sample(rng, n, h).into_vec();
                BitVector::from_indices(n, &picked).expect("indices below n")
            }
            None => modified::sample_randomness(n, rng),
        };
        if r.to_biguint() <= BigUint::one() {
            continue;
        }
        let (c1_prime, c1_dprime) = modified::mask_randomness(pk, &r);
        if c1_prime == challenge.c1_prime && c1_dprime == challenge.c1_dprime {
            continue;
        }
        return Ciphertext { c1_prime, c1_dprime, c2: challenge.c2.clone() };
    }
}

/// Replaces each listed component (0 = `C1'`, 1 = `C1''`, 2 = `C2`) by a
/// different uniform value from `[1, p)`.
pub(super) fn mutate_components(challenge: &Ciphertext, pk: &PublicKey, components: &[usize], rng: &mut dyn RngCore) -> Ciphertext {
    let mut out = challenge.clone();
    for &i in components {
        let fresh = random_unit_except(pk.modulus(), challenge.component(i), rng);
        *out.component_mut(i) = fresh;
    }
    out
}

/// An accepted mutation with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forgery {
    pub index: u64,
    /// Seeds the key pair for the batch containing this mutation.
    pub batch_seed: u64,
    /// Seeds message, randomness, pattern choice and the replacement values.
    pub mutation_seed: u64,
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub mutations: u64,
    pub rejected: u64,
    pub accepted: Vec<Forgery>,
}

impl FuzzReport {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.len() as f64 / self.mutations as f64
    }

    /// Accepted forgeries per pattern, in the order the patterns first appear.
    pub fn accepted_by_pattern(&self) -> Vec<(Vec<usize>, u64)> {
        let mut counts: Vec<(Vec<usize>, u64)> = Vec::new();
        for f in &self.accepted {
            match counts.iter_mut().find(|(c, _)| *c == f.components) {
                Some((_, k)) => *k += 1,
                None => counts.push((f.components.clone(), 1)),
            }
        }
        counts
    }
}

/// Mutates honest ciphertexts and counts what decryption lets through.
/// A fresh key pair serves `per_key` consecutive mutations; each mutation
/// picks one of `patterns` uniformly.
pub fn mutation_fuzz(
    scheme: &ModifiedScheme,
    mutations: u64,
    per_key: u64,
    patterns: &[&[usize]],
    seed: u64,
) -> Result<FuzzReport> {
    if mutations == 0 || per_key == 0 {
        return Err(Error::Parameter("mutation and batch counts must be positive".into()));
    }
    if patterns.is_empty() || patterns.iter().any(|p| p.is_empty() || p.iter().any(|&i| i > 2)) {
        return Err(Error::Parameter("patterns must list component indices 0..=2".into()));
    }
    let mut seeds = ChaCha20Rng::seed_from_u64(seed);
    let mut report = FuzzReport { mutations, ..FuzzReport::default() };
    let mut index = 0;
    while index < mutations {
        let batch_seed = seeds.next_u64();
        let mut batch = ChaCha20Rng::seed_from_u64(batch_seed);
        let (pk, sk) = scheme.keygen(&mut batch)?;
        for _ in 0..per_key.min(mutations - index) {
            let mutation_seed = batch.next_u64();
            let mut rng = ChaCha20Rng::seed_from_u64(mutation_seed);
            let m = scheme.random_message(&pk, &mut rng);
            let honest = modified::encrypt(&pk, &m, &mut rng)?;
            let pattern = patterns[rng.gen_range(0..patterns.len())];
            let forged = mutate_components(&honest, &pk, pattern, &mut rng);
            if modified::decrypt(&sk, &forged).is_rejected() {
                report.rejected += 1;
            } else {
                report.accepted.push(Forgery { index, batch_seed, mutation_seed, components: pattern.to_vec() });
            }
            index += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modified::{DecryptOutcome, RejectReason};

    fn keys(seed: u64) -> (PublicKey, modified::SecretKey) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        modified::keygen(&modified::KeyParams::new(8, 10), &mut rng).unwrap()
    }

    #[test]
    fn case1_never_reuses_challenge_c2() {
        let (pk, _) = keys(1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let ct = modified::encrypt(&pk, &BigUint::from(77u32), &mut rng).unwrap();
        for _ in 0..500 {
            let q = malleation_case1(&ct, &pk, &mut rng);
            assert_ne!(q.c2, ct.c2);
            assert_eq!((&q.c1_prime, &q.c1_dprime), (&ct.c1_prime, &ct.c1_dprime));
        }
    }

    #[test]
    fn case2_uses_fresh_honest_c1() {
        let (pk, sk) = keys(3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for match_weight in [false, true] {
            for _ in 0..100 {
                let ct = modified::encrypt(&pk, &BigUint::from(5u32), &mut rng).unwrap();
                let (r_star, h_star) = modified::recover_randomness(&sk, &ct.c1_prime, &ct.c1_dprime).unwrap();
                let q = malleation_case2(&ct, &pk, match_weight, &mut rng);
                assert_eq!(q.c2, ct.c2);
                let (r, h) = modified::recover_randomness(&sk, &q.c1_prime, &q.c1_dprime).unwrap();
                assert_ne!(r, r_star);
                assert!(r.to_biguint() > BigUint::one());
                assert_eq!(modified::mask_randomness(&pk, &r), (q.c1_prime.clone(), q.c1_dprime.clone()));
                if match_weight {
                    assert_eq!(h, h_star);
                }
            }
        }
    }

    #[test]
    fn mutating_c1_components_is_rejected_as_inconsistent_randomness() {
        let (pk, sk) = keys(5);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mut inconsistent = 0;
        for _ in 0..200 {
            let ct = modified::encrypt(&pk, &BigUint::from(9u32), &mut rng).unwrap();
            let forged = mutate_components(&ct, &pk, &[1], &mut rng);
            if modified::decrypt(&sk, &forged) == DecryptOutcome::Rejected(RejectReason::RandomnessInconsistent) {
                inconsistent += 1;
            }
        }
        assert!(inconsistent >= 190, "{inconsistent}");
    }

    #[test]
    fn fuzz_report_is_reproducible_from_seeds() {
        let scheme = ModifiedScheme::new(8, 10);
        let report = mutation_fuzz(&scheme, 300, 50, &SINGLE_COMPONENT_PATTERNS, 11).unwrap();
        assert_eq!(report.rejected + report.accepted.len() as u64, 300);
        assert_eq!(report, mutation_fuzz(&scheme, 300, 50, &SINGLE_COMPONENT_PATTERNS, 11).unwrap());
        // Replay one forgery from its recorded seeds.
        if let Some(f) = report.accepted.first() {
            let mut batch = ChaCha20Rng::seed_from_u64(f.batch_seed);
            let (pk, sk) = scheme.keygen(&mut batch).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(f.mutation_seed);
            let m = scheme.random_message(&pk, &mut rng);
            let honest = modified::encrypt(&pk, &m, &mut rng).unwrap();
            let _ = rng.gen_range(0..SINGLE_COMPONENT_PATTERNS.len());
            let forged = mutate_components(&honest, &pk, &f.components, &mut rng);
            assert!(!modified::decrypt(&sk, &forged).is_rejected());
        }
    }

    #[test]
    fn fuzz_argument_checks() {
        let scheme = ModifiedScheme::new(4, 8);
        assert!(mutation_fuzz(&scheme, 0, 1, &SINGLE_COMPONENT_PATTERNS, 0).is_err());
        assert!(mutation_fuzz(&scheme, 1, 0, &SINGLE_COMPONENT_PATTERNS, 0).is_err());
        assert!(mutation_fuzz(&scheme, 1, 1, &[&[3]], 0).is_err());
        assert!(mutation_fuzz(&scheme, 1, 1, &[], 0).is_err());
    }
}
