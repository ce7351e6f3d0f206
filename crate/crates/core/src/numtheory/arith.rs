use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

fn check_modulus(modulus: &BigUint) -> Result<()> {
    if *modulus < BigUint::from(2u32) {
        Err(Error::InvalidModulus)
    } else {
        Ok(())
    }
}

/// `base^exp mod modulus`. Odd moduli go through Montgomery multiplication.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    check_modulus(modulus)?;
    Ok(base.modpow(exp, modulus))
}

/// The inverse of `a` modulo `modulus`, via the extended Euclidean algorithm.
pub fn mod_inv(a: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    check_modulus(modulus)?;
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(Error::NoInverse);
    }
    Ok(old_s
        .mod_floor(&m)
        .to_biguint()
        .expect("mod_floor of a positive modulus is non-negative"))
}

/// Greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = std::mem::replace(&mut b, r);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn worked_example_values() {
        let p = big(2579);
        assert_eq!(mod_pow(&big(2), &big(1500), &p).unwrap(), big(862));
        assert_eq!(mod_pow(&big(2), &big(348), &p).unwrap(), big(104));
        let c1x = mod_pow(&big(10816), &big(1500), &p).unwrap();
        assert_eq!(mod_inv(&c1x, &p).unwrap(), big(2483));
        assert_eq!(gcd(&big(72), &big(3)), big(3));
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(mod_pow(&big(12345), &big(0), &big(2579)).unwrap(), big(1));
        assert_eq!(mod_inv(&big(1), &big(97)).unwrap(), big(1));
        assert_eq!(gcd(&big(17), &big(0)), big(17));
        assert_eq!(gcd(&big(0), &big(0)), big(0));
    }

    #[test]
    fn errors() {
        assert_eq!(mod_pow(&big(2), &big(3), &big(1)), Err(Error::InvalidModulus));
        assert_eq!(mod_inv(&big(2), &big(0)), Err(Error::InvalidModulus));
        assert_eq!(mod_inv(&big(6), &big(9)), Err(Error::NoInverse));
        assert_eq!(mod_inv(&big(0), &big(7)), Err(Error::NoInverse));
    }

    // Naive oracles: repeated multiplication and search for an inverse.
    #[test]
    fn agrees_with_naive_arithmetic() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let m: u64 = rng.gen_range(2..500);
            let b: u64 = rng.gen_range(0..2000);
            let e: u64 = rng.gen_range(0..40);
            let naive = (0..e).fold(1u64 % m, |acc, _| acc * (b % m) % m);
            assert_eq!(mod_pow(&big(b), &big(e), &big(m)).unwrap(), big(naive));

            let naive_inv = (1..m).find(|w| b % m * w % m == 1 % m);
            match naive_inv {
                Some(w) if m > 1 => assert_eq!(mod_inv(&big(b), &big(m)).unwrap(), big(w)),
                _ => assert_eq!(mod_inv(&big(b), &big(m)), Err(Error::NoInverse)),
            }
        }
    }

    #[test]
    fn inverse_verified_by_multiplication() {
        let p = big(1_000_000_007);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = big(rng.gen_range(1..1_000_000_007));
            let w = mod_inv(&a, &p).unwrap();
            assert_eq!(a * w % &p, big(1));
        }
    }
}
