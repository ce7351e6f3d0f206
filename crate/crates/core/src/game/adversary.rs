use num_bigint::BigUint;
use rand::{Rng, RngCore};

use super::malleation::{malleation_case1, malleation_case2, mutate_components};
use super::{DecryptionOracle, ModifiedScheme, OracleResponse, Scheme};
use crate::attack::recover_hamming_weight_mod;
use crate::modified::{Ciphertext, PublicKey};
use crate::numtheory::mod_pow;

/// A two-stage chosen-ciphertext adversary. State carried from the first
/// stage to the second lives in `self`.
pub trait Adversary<S: Scheme> {
    fn name(&self) -> String;

    fn choose(
        &mut self,
        scheme: &S,
        pk: &S::PublicKey,
        oracle: &mut DecryptionOracle<'_, S>,
        rng: &mut dyn RngCore,
    ) -> (S::Message, S::Message);

    fn guess(
        &mut self,
        scheme: &S,
        pk: &S::PublicKey,
        challenge: &S::Ciphertext,
        oracle: &mut DecryptionOracle<'_, S>,
        rng: &mut dyn RngCore,
    ) -> u8;
}

fn distinct_pair<S: Scheme>(scheme: &S, pk: &S::PublicKey, rng: &mut dyn RngCore) -> (S::Message, S::Message) {
    let m0 = scheme.random_message(pk, rng);
    loop {
        let m1 = scheme.random_message(pk, rng);
        if m1 != m0 {
            return (m0, m1);
        }
    }
}

/// Guesses uniformly at random.
#[derive(Debug, Default, Clone)]
pub struct CoinFlip;

impl<S: Scheme> Adversary<S> for CoinFlip {
    fn name(&self) -> String {
        "coin-flip".into()
    }

    fn choose(&mut self, scheme: &S, pk: &S::PublicKey, _: &mut DecryptionOracle<'_, S>, rng: &mut dyn RngCore) -> (S::Message, S::Message) {
        distinct_pair(scheme, pk, rng)
    }

    fn guess(&mut self, _: &S, _: &S::PublicKey, _: &S::Ciphertext, _: &mut DecryptionOracle<'_, S>, rng: &mut dyn RngCore) -> u8 {
        rng.gen_range(0..2)
    }
}

/// Re-encrypts `m0` under the public key and compares with the challenge.
/// Wins every game against a deterministic scheme.
#[derive(Debug, Clone)]
pub struct Comparison<M> {
    pair: Option<(M, M)>,
}

impl<M> Default for Comparison<M> {
    fn default() -> Self {
        Comparison { pair: None }
    }
}

impl<S: Scheme> Adversary<S> for Comparison<S::Message> {
    fn name(&self) -> String {
        "distinguisher".into()
    }

    fn choose(&mut self, scheme: &S, pk: &S::PublicKey, _: &mut DecryptionOracle<'_, S>, rng: &mut dyn RngCore) -> (S::Message, S::Message) {
        let pair = distinct_pair(scheme, pk, rng);
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(&mut self, scheme: &S, pk: &S::PublicKey, challenge: &S::Ciphertext, _: &mut DecryptionOracle<'_, S>, rng: &mut dyn RngCore) -> u8 {
        let (m0, _) = self.pair.as_ref().expect("choose runs first");
        match scheme.encrypt(pk, m0, rng) {
            Ok(c0) if c0 == *challenge => 0,
            _ => 1,
        }
    }
}

/// Maps an oracle answer on a malleated query to a guess, falling back to a
/// coin flip when the answer says nothing about the challenge.
fn read_answer(answer: OracleResponse<BigUint>, pair: &(BigUint, BigUint), rng: &mut dyn RngCore) -> u8 {
    match answer {
        OracleResponse::Plaintext(m) if m == pair.0 => 0,
        OracleResponse::Plaintext(m) if m == pair.1 => 1,
        _ => rng.gen_range(0..2),
    }
}

/// Keeps `C1*` and replaces `C2` by a random value.
#[derive(Debug, Default, Clone)]
pub struct MalleationCase1 {
    pair: Option<(BigUint, BigUint)>,
}

impl Adversary<ModifiedScheme> for MalleationCase1 {
    fn name(&self) -> String {
        "malleation-case1".into()
    }

    fn choose(&mut self, scheme: &ModifiedScheme, pk: &PublicKey, _: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> (BigUint, BigUint) {
        let pair = distinct_pair(scheme, pk, rng);
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(&mut self, _: &ModifiedScheme, pk: &PublicKey, challenge: &Ciphertext, oracle: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> u8 {
        let query = malleation_case1(challenge, pk, rng);
        let answer = oracle.query(&query);
        read_answer(answer, self.pair.as_ref().expect("choose runs first"), rng)
    }
}

/// Keeps `C2*` and replaces `C1` by an honest `C1` for fresh randomness.
#[derive(Debug, Default, Clone)]
pub struct MalleationCase2 {
    /// Force the fresh randomness to the challenge's Hamming weight.
    pub match_weight: bool,
    pair: Option<(BigUint, BigUint)>,
}

impl MalleationCase2 {
    pub fn new(match_weight: bool) -> Self {
        MalleationCase2 { match_weight, pair: None }
    }
}

impl Adversary<ModifiedScheme> for MalleationCase2 {
    fn name(&self) -> String {
        if self.match_weight { "malleation-case2-same-weight".into() } else { "malleation-case2".into() }
    }

    fn choose(&mut self, scheme: &ModifiedScheme, pk: &PublicKey, _: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> (BigUint, BigUint) {
        let pair = distinct_pair(scheme, pk, rng);
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(&mut self, _: &ModifiedScheme, pk: &PublicKey, challenge: &Ciphertext, oracle: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> u8 {
        let query = malleation_case2(challenge, pk, self.match_weight, rng);
        let answer = oracle.query(&query);
        read_answer(answer, self.pair.as_ref().expect("choose runs first"), rng)
    }
}

/// Replaces the listed components (0 = `C1'`, 1 = `C1''`, 2 = `C2`) of the
/// challenge by random values.
#[derive(Debug, Clone)]
pub struct MutationProbe {
    pub components: Vec<usize>,
    pair: Option<(BigUint, BigUint)>,
}

impl MutationProbe {
    pub fn new(components: &[usize]) -> Self {
        MutationProbe { components: components.to_vec(), pair: None }
    }
}

impl Adversary<ModifiedScheme> for MutationProbe {
    fn name(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        format!("mutate-{}", parts.join("+"))
    }

    fn choose(&mut self, scheme: &ModifiedScheme, pk: &PublicKey, _: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> (BigUint, BigUint) {
        let pair = distinct_pair(scheme, pk, rng);
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(&mut self, _: &ModifiedScheme, pk: &PublicKey, challenge: &Ciphertext, oracle: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> u8 {
        let query = mutate_components(challenge, pk, &self.components, rng);
        let answer = oracle.query(&query);
        read_answer(answer, self.pair.as_ref().expect("choose runs first"), rng)
    }
}

/// Queries `(C1*, C2*^2)`. The message check accepts it, and the answer is
/// `(m_b + h)^2 - h mod p`; `h` is public through `C1'`, so comparing against
/// both candidate messages reveals `b`.
#[derive(Debug, Default, Clone)]
pub struct SquareMalleation {
    pair: Option<(BigUint, BigUint)>,
}

impl Adversary<ModifiedScheme> for SquareMalleation {
    fn name(&self) -> String {
        "square-malleation".into()
    }

    fn choose(&mut self, scheme: &ModifiedScheme, pk: &PublicKey, _: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> (BigUint, BigUint) {
        let pair = distinct_pair(scheme, pk, rng);
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(&mut self, _: &ModifiedScheme, pk: &PublicKey, challenge: &Ciphertext, oracle: &mut DecryptionOracle<'_, ModifiedScheme>, rng: &mut dyn RngCore) -> u8 {
        let (m0, m1) = self.pair.clone().expect("choose runs first");
        let p = pk.modulus();
        let two = BigUint::from(2u32);
        let query = Ciphertext { c2: mod_pow(&challenge.c2, &two, p).expect("p is prime"), ..challenge.clone() };
        let Ok(h) = recover_hamming_weight_mod(pk, &challenge.c1_prime) else {
            return rng.gen_range(0..2);
        };
        let predicted = |m: &BigUint| {
            let root = mod_pow(&(m + h), &two, p).expect("p is prime");
            (root >= BigUint::from(h)).then(|| root - h)
        };
        match oracle.query(&query) {
            OracleResponse::Plaintext(answer) if Some(&answer) == predicted(&m0).as_ref() => 0,
            OracleResponse::Plaintext(answer) if Some(&answer) == predicted(&m1).as_ref() => 1,
            _ => rng.gen_range(0..2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::deterministic_distinguisher;
    use crate::game::{run_ind_cca2, OriginalScheme};
    use crate::BitVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn comparison_matches_attack_distinguisher() {
        let scheme = OriginalScheme::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (pk, sk) = scheme.keygen(&mut rng).unwrap();
            let mut adversary = Comparison::<BitVector>::default();
            let mut oracle = DecryptionOracle::new(&scheme, &sk);
            let (m0, m1) = adversary.choose(&scheme, &pk, &mut oracle, &mut rng);
            for m in [&m0, &m1] {
                let challenge = scheme.encrypt(&pk, m, &mut rng).unwrap();
                let ours = adversary.guess(&scheme, &pk, &challenge, &mut oracle, &mut rng);
                assert_eq!(ours, deterministic_distinguisher(&pk, &m0, &m1, &challenge).unwrap());
            }
        }
    }

    #[test]
    fn comparison_always_wins_against_original() {
        let scheme = OriginalScheme::new(6);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let result = run_ind_cca2(&scheme, &mut Comparison::default(), 200, &mut rng).unwrap();
        assert_eq!(result.wins, 200);
        assert_eq!(result.advantage, 0.5);
    }

    #[test]
    fn coin_flip_has_no_advantage() {
        let scheme = ModifiedScheme::new(4, 8);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let result = run_ind_cca2(&scheme, &mut CoinFlip, 1000, &mut rng).unwrap();
        assert!(result.within_three_sigma(), "{result:?}");
    }

    #[test]
    fn square_malleation_breaks_modified_scheme() {
        let scheme = ModifiedScheme::new(6, 10);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let result = run_ind_cca2(&scheme, &mut SquareMalleation::default(), 200, &mut rng).unwrap();
        assert!(result.wins >= 195, "{result:?}");
        assert_eq!(result.refused, 0);
    }
}
