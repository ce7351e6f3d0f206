//! Seeded instance builders shared by the benchmarks.

use mkcrypt_core::{modified, original, BigUint, BitVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// An original-scheme public key and the encryption of a random weight-`h` message.
pub fn attack_instance(n: usize, h: usize, seed: u64) -> (original::PublicKey, original::Ciphertext, BitVector) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (pk, _) = original::keygen(&original::KeyParams::new(n), &mut rng).expect("valid parameters");
    let picked = rand::seq::index::sample(&mut rng, n, h).into_vec();
    let m = BitVector::from_indices(n, &picked).expect("indices below n");
    let ct = original::encrypt(&pk, &m).expect("message matches key");
    (pk, ct, m)
}

pub fn original_keys(n: usize, seed: u64) -> (original::PublicKey, original::SecretKey) {
    original::keygen(&original::KeyParams::new(n), &mut ChaCha20Rng::seed_from_u64(seed)).expect("valid parameters")
}

pub fn modified_keys(n: usize, prime_bits: u64, seed: u64) -> (modified::PublicKey, modified::SecretKey) {
    modified::keygen(&modified::KeyParams::new(n, prime_bits), &mut ChaCha20Rng::seed_from_u64(seed))
        .expect("valid parameters")
}

/// A fixed mid-range plaintext for the modified scheme.
pub fn modified_message(pk: &modified::PublicKey) -> BigUint {
    pk.max_message() / 2u32
}
