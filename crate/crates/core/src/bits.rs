use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};

/// An ordered, non-empty string of bits `x_1 .. x_n`.
///
/// Index `i` (zero based) holds `x_{i+1}`. When a vector is read as an
/// integer, `x_1` is the most significant bit, which is also the order used
/// by the textual form (`"01001"` has `x_2 = x_5 = 1`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidBits);
        }
        Ok(BitVector(bits))
    }

    /// Builds a vector from 0/1 integers.
    pub fn from_slice(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidBits);
        }
        Self::new(bits.iter().map(|&b| b == 1).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![true; n])
    }

    /// Bit `i` of `mask` becomes entry `i` (i.e. `x_{i+1}`).
    pub fn from_mask(mask: u64, n: usize) -> Self {
        assert!((1..=64).contains(&n), "mask vectors hold 1..=64 bits");
        BitVector((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    /// Inverse of [`BitVector::from_mask`]; `None` when longer than 64 bits.
    pub fn to_mask(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .fold(0u64, |acc, (i, _)| acc | 1 << i),
        )
    }

    /// The `n` bits of a weight-`weight` subset given by its sorted indices.
    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in indices {
            *bits.get_mut(i).ok_or(Error::InvalidBits)? = true;
        }
        Self::new(bits)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| rng.gen::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        self.weight() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// Zero-based positions of the set bits, ascending.
    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Integer value with `x_1` as the most significant bit.
    pub fn to_biguint(&self) -> BigUint {
        self.0.iter().fold(BigUint::zero(), |acc, &b| {
            (acc << 1u32) + if b { 1u32 } else { 0u32 }
        })
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBits),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: BitVector = "01001".parse().unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m.weight(), 2);
        assert_eq!(m.ones_indices().collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(m.to_string(), "01001");
        assert_eq!(m.to_biguint(), BigUint::from(9u32));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!("".parse::<BitVector>(), Err(Error::InvalidBits));
        assert_eq!("0120".parse::<BitVector>(), Err(Error::InvalidBits));
        assert_eq!(BitVector::from_slice(&[0, 2]), Err(Error::InvalidBits));
        assert!(BitVector::zeros(0).is_err());
    }

    #[test]
    fn mask_roundtrip() {
        for mask in 0u64..32 {
            let v = BitVector::from_mask(mask, 5);
            assert_eq!(v.to_mask(), Some(mask));
        }
        assert_eq!(
            BitVector::from_mask(0b10010, 5),
            "01001".parse().unwrap()
        );
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let a: BitVector = "00110".parse().unwrap();
        let b: BitVector = "01001".parse().unwrap();
        assert!(a < b);
    }
}
