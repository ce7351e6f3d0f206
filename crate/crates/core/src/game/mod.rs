//! Executable security experiments.
//!
//! [`run_ind_cca2`] plays the two-stage chosen-ciphertext game against any
//! [`Scheme`]: fresh keys per trial, the adversary picks two equal-length
//! messages with oracle access, receives the encryption of one of them, may
//! query the oracle on anything except the challenge, and guesses which one
//! was encrypted. [`run_completeness_trials`] measures how often honest
//! ciphertexts decrypt to exactly their plaintext.

mod adversary;
mod malleation;

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::{modified, original};

pub use adversary::{Adversary, CoinFlip, Comparison, MalleationCase1, MalleationCase2, MutationProbe, SquareMalleation};
pub use malleation::{
    malleation_case1, malleation_case2, mutation_fuzz, FuzzReport, Forgery, PAIRWISE_PATTERNS,
    SINGLE_COMPONENT_PATTERNS,
};

/// A public-key encryption scheme as the experiments see it.
pub trait Scheme {
    type PublicKey: Clone;
    type SecretKey;
    type Message: Clone + PartialEq + fmt::Debug;
    type Ciphertext: Clone + PartialEq + fmt::Debug;

    fn name(&self) -> &'static str;

    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Self::PublicKey, Self::SecretKey)>;

    fn random_message(&self, pk: &Self::PublicKey, rng: &mut dyn RngCore) -> Self::Message;

    /// Encoded length of a message; the game requires `|m0| = |m1|`.
    fn message_len(&self, pk: &Self::PublicKey, m: &Self::Message) -> usize;

    fn encrypt(&self, pk: &Self::PublicKey, m: &Self::Message, rng: &mut dyn RngCore) -> Result<Self::Ciphertext>;

    /// All plaintexts the decryption algorithm considers valid for `ct`.
    fn decrypt_candidates(&self, sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Vec<Self::Message>;

    /// Decryption with a single output: the message, or `None` for the error symbol.
    fn decrypt(&self, sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Option<Self::Message> {
        let mut found = self.decrypt_candidates(sk, ct);
        if found.len() == 1 {
            found.pop()
        } else {
            None
        }
    }
}

/// The original deterministic scheme over `n`-bit messages.
#[derive(Debug, Clone)]
pub struct OriginalScheme {
    pub params: original::KeyParams,
}

impl OriginalScheme {
    pub fn new(n: usize) -> Self {
        OriginalScheme { params: original::KeyParams::new(n) }
    }
}

impl Scheme for OriginalScheme {
    type PublicKey = original::PublicKey;
    type SecretKey = original::SecretKey;
    type Message = BitVector;
    type Ciphertext = original::Ciphertext;

    fn name(&self) -> &'static str {
        "original"
    }

    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Self::PublicKey, Self::SecretKey)> {
        original::keygen(&self.params, rng)
    }

    fn random_message(&self, pk: &Self::PublicKey, rng: &mut dyn RngCore) -> BitVector {
        loop {
            let m = BitVector::random(pk.n(), rng).expect("n >= 2");
            if !m.is_zero() {
                return m;
            }
        }
    }

    fn message_len(&self, _pk: &Self::PublicKey, m: &BitVector) -> usize {
        m.len()
    }

    fn encrypt(&self, pk: &Self::PublicKey, m: &BitVector, _rng: &mut dyn RngCore) -> Result<Self::Ciphertext> {
        original::encrypt(pk, m)
    }

    fn decrypt_candidates(&self, sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Vec<BitVector> {
        original::decrypt_all(sk, ct).unwrap_or_default()
    }
}

/// The randomized scheme over integer messages in `[1, p - n - 1]`.
#[derive(Debug, Clone)]
pub struct ModifiedScheme {
    pub params: modified::KeyParams,
}

impl ModifiedScheme {
    pub fn new(n: usize, prime_bits: u64) -> Self {
        ModifiedScheme { params: modified::KeyParams::new(n, prime_bits) }
    }
}

impl Scheme for ModifiedScheme {
    type PublicKey = modified::PublicKey;
    type SecretKey = modified::SecretKey;
    type Message = BigUint;
    type Ciphertext = modified::Ciphertext;

    fn name(&self) -> &'static str {
        "modified"
    }

    fn keygen(&self, rng: &mut dyn RngCore) -> Result<(Self::PublicKey, Self::SecretKey)> {
        modified::keygen(&self.params, rng)
    }

    fn random_message(&self, pk: &Self::PublicKey, rng: &mut dyn RngCore) -> BigUint {
        rng.gen_biguint_range(&BigUint::one(), &(pk.max_message() + 1u32))
    }

    /// Messages are fixed-width elements of `Z_p`.
    fn message_len(&self, pk: &Self::PublicKey, _m: &BigUint) -> usize {
        pk.modulus().bits() as usize
    }

    fn encrypt(&self, pk: &Self::PublicKey, m: &BigUint, rng: &mut dyn RngCore) -> Result<Self::Ciphertext> {
        modified::encrypt(pk, m, rng)
    }

    fn decrypt_candidates(&self, sk: &Self::SecretKey, ct: &Self::Ciphertext) -> Vec<BigUint> {
        modified::decrypt(sk, ct).message().cloned().into_iter().collect()
    }
}

/// What the decryption oracle hands back. Rejections carry no reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResponse<M> {
    Plaintext(M),
    Reject,
    /// The query was the challenge ciphertext itself.
    Refused,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub queries: u64,
    pub answered: u64,
    pub rejected: u64,
    pub refused: u64,
}

/// Decryption oracle that never decrypts the challenge ciphertext.
pub struct DecryptionOracle<'a, S: Scheme> {
    scheme: &'a S,
    sk: &'a S::SecretKey,
    challenge: Option<S::Ciphertext>,
    stats: OracleStats,
}

impl<'a, S: Scheme> DecryptionOracle<'a, S> {
    pub fn new(scheme: &'a S, sk: &'a S::SecretKey) -> Self {
        DecryptionOracle { scheme, sk, challenge: None, stats: OracleStats::default() }
    }

    pub fn set_challenge(&mut self, challenge: S::Ciphertext) {
        self.challenge = Some(challenge);
    }

    pub fn query(&mut self, ct: &S::Ciphertext) -> OracleResponse<S::Message> {
        self.stats.queries += 1;
        if self.challenge.as_ref() == Some(ct) {
            self.stats.refused += 1;
            return OracleResponse::Refused;
        }
        self.answer(ct)
    }

    fn answer(&mut self, ct: &S::Ciphertext) -> OracleResponse<S::Message> {
        assert!(self.challenge.as_ref() != Some(ct), "oracle reached the challenge ciphertext");
        match self.scheme.decrypt(self.sk, ct) {
            Some(m) => {
                self.stats.answered += 1;
                OracleResponse::Plaintext(m)
            }
            None => {
                self.stats.rejected += 1;
                OracleResponse::Reject
            }
        }
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }
}

/// Aggregate outcome of a batch of games.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scheme: String,
    pub adversary: String,
    pub trials: u64,
    pub wins: u64,
    /// `|wins / trials - 1/2|`.
    pub advantage: f64,
    pub queries: u64,
    pub rejections: u64,
    /// Oracle queries answered with a plaintext.
    pub accepted: u64,
    pub refused: u64,
}

pub const EXPERIMENT_CSV_HEADER: &str = "scheme,adversary,trials,wins,advantage,rejections";

impl ExperimentResult {
    pub fn new(scheme: &str, adversary: &str, trials: u64, wins: u64, stats: OracleStats) -> Self {
        assert!(wins <= trials);
        ExperimentResult {
            scheme: scheme.to_string(),
            adversary: adversary.to_string(),
            trials,
            wins,
            advantage: (wins as f64 / trials as f64 - 0.5).abs(),
            queries: stats.queries,
            rejections: stats.rejected,
            accepted: stats.answered,
            refused: stats.refused,
        }
    }

    pub fn win_rate(&self) -> f64 {
        self.wins as f64 / self.trials as f64
    }

    /// Whether the win rate lies within three binomial standard deviations of 1/2.
    pub fn within_three_sigma(&self) -> bool {
        self.advantage <= 3.0 * (0.25 / self.trials as f64).sqrt()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{}",
            self.scheme, self.adversary, self.trials, self.wins, self.advantage, self.rejections
        )
    }
}

fn trial_rng(rng: &mut dyn RngCore) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(rng.next_u64())
}

/// Plays `trials` independent chosen-ciphertext games.
pub fn run_ind_cca2<S: Scheme, A: Adversary<S>>(
    scheme: &S,
    adversary: &mut A,
    trials: u64,
    rng: &mut dyn RngCore,
) -> Result<ExperimentResult> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    let mut wins = 0;
    let mut stats = OracleStats::default();
    for _ in 0..trials {
        let mut rng = trial_rng(rng);
        let (pk, sk) = scheme.keygen(&mut rng)?;
        let mut oracle = DecryptionOracle::new(scheme, &sk);
        let (m0, m1) = adversary.choose(scheme, &pk, &mut oracle, &mut rng);
        if scheme.message_len(&pk, &m0) != scheme.message_len(&pk, &m1) {
            return Err(Error::Parameter("challenge messages differ in length".into()));
        }
        let b = rng.gen_range(0..2u8);
        let challenge = scheme.encrypt(&pk, if b == 0 { &m0 } else { &m1 }, &mut rng)?;
        oracle.set_challenge(challenge.clone());
        let guess = adversary.guess(scheme, &pk, &challenge, &mut oracle, &mut rng);
        if guess == b {
            wins += 1;
        }
        let s = oracle.stats();
        stats.queries += s.queries;
        stats.answered += s.answered;
        stats.rejected += s.rejected;
        stats.refused += s.refused;
    }
    Ok(ExperimentResult::new(scheme.name(), &adversary.name(), trials, wins, stats))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CompletenessRecord {
    /// Decrypted to exactly the plaintext.
    pub unique: u64,
    /// The plaintext was among several valid decryptions.
    pub ambiguous: u64,
    /// The plaintext was not recovered at all.
    pub failed: u64,
}

impl CompletenessRecord {
    pub fn total(&self) -> u64 {
        self.unique + self.ambiguous + self.failed
    }

    fn record<M: PartialEq>(&mut self, candidates: &[M], m: &M) {
        match candidates {
            [only] if only == m => self.unique += 1,
            _ if candidates.contains(m) => self.ambiguous += 1,
            _ => self.failed += 1,
        }
    }
}

/// Fresh keys and a random message per trial; encrypt, decrypt, classify.
pub fn run_completeness_trials<S: Scheme>(scheme: &S, trials: u64, rng: &mut dyn RngCore) -> Result<CompletenessRecord> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    let mut record = CompletenessRecord::default();
    for _ in 0..trials {
        let mut rng = trial_rng(rng);
        let (pk, sk) = scheme.keygen(&mut rng)?;
        let m = scheme.random_message(&pk, &mut rng);
        let ct = scheme.encrypt(&pk, &m, &mut rng)?;
        record.record(&scheme.decrypt_candidates(&sk, &ct), &m);
    }
    Ok(record)
}

/// Completeness over a fixed key and an explicit message list.
pub fn run_completeness_over<S: Scheme>(
    scheme: &S,
    pk: &S::PublicKey,
    sk: &S::SecretKey,
    messages: &[S::Message],
    rng: &mut dyn RngCore,
) -> Result<CompletenessRecord> {
    let mut record = CompletenessRecord::default();
    for m in messages {
        let ct = scheme.encrypt(pk, m, rng)?;
        record.record(&scheme.decrypt_candidates(sk, &ct), m);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::SuperIncreasingSeq;

    fn toy_keys() -> (original::PublicKey, original::SecretKey) {
        let big = |v: u64| BigUint::from(v);
        let sk = original::SecretKey::from_parts(
            big(2579),
            big(2),
            big(1500),
            big(348),
            SuperIncreasingSeq::from_u64s(&[2, 3, 6, 12, 24]).unwrap(),
        )
        .unwrap();
        (sk.public_key(), sk)
    }

    #[test]
    fn oracle_refuses_challenge() {
        let scheme = OriginalScheme::new(5);
        let (pk, sk) = toy_keys();
        let mut oracle = DecryptionOracle::new(&scheme, &sk);
        let ct = original::encrypt(&pk, &"10000".parse().unwrap()).unwrap();
        assert_eq!(oracle.query(&ct), OracleResponse::Plaintext("10000".parse().unwrap()));
        oracle.set_challenge(ct.clone());
        assert_eq!(oracle.query(&ct), OracleResponse::Refused);
        // Ambiguous ciphertexts come back as the bare error symbol.
        let ambiguous = original::encrypt(&pk, &"01001".parse().unwrap()).unwrap();
        assert_eq!(oracle.query(&ambiguous), OracleResponse::Reject);
        assert_eq!(oracle.stats(), OracleStats { queries: 3, answered: 1, rejected: 1, refused: 1 });
    }

    #[test]
    fn toy_key_completeness() {
        let scheme = OriginalScheme::new(5);
        let (pk, sk) = toy_keys();
        let messages: Vec<_> = (1u64..32).map(|m| BitVector::from_mask(m, 5)).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let record = run_completeness_over(&scheme, &pk, &sk, &messages, &mut rng).unwrap();
        assert_eq!(record.total(), 31);
        assert!(record.ambiguous >= 1);
        assert!(record.failed >= 1);
    }

    #[test]
    fn coprime_original_completeness() {
        let mut scheme = OriginalScheme::new(8);
        scheme.params.coprime = true;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let record = run_completeness_trials(&scheme, 100, &mut rng).unwrap();
        assert_eq!(record.unique, 100);
    }

    #[test]
    fn modified_completeness() {
        let scheme = ModifiedScheme::new(6, 10);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let record = run_completeness_trials(&scheme, 200, &mut rng).unwrap();
        assert_eq!(record, CompletenessRecord { unique: 200, ambiguous: 0, failed: 0 });
    }

    #[test]
    fn experiment_result_math() {
        let stats = OracleStats::default();
        let r = ExperimentResult::new("s", "a", 1000, 1000, stats);
        assert_eq!(r.advantage, 0.5);
        assert!(!r.within_three_sigma());
        let r = ExperimentResult::new("s", "a", 1000, 520, stats);
        assert!((r.advantage - 0.02).abs() < 1e-12);
        assert!(r.within_three_sigma());
        assert_eq!(r.csv_row(), "s,a,1000,520,0.020000,0");
    }

    #[test]
    fn zero_trials_rejected() {
        let scheme = OriginalScheme::new(4);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert!(run_ind_cca2(&scheme, &mut CoinFlip, 0, &mut rng).is_err());
        assert!(run_completeness_trials(&scheme, 0, &mut rng).is_err());
    }
}
