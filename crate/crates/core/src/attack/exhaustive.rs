use std::time::Instant;

use num_bigint::BigUint;
use num_traits::One;

use super::{check_attack_size, recover_hamming_weight, AttackReport, Strategy};
use crate::bits::BitVector;
use crate::error::Result;
use crate::numtheory::{binomial, entropy_bound};
use crate::original::{Ciphertext, PublicKey};

/// Ciphertext-only attack by enumeration of weight-`h` subsets.
///
/// Subsets are visited in lexicographic order; a branch is abandoned as soon
/// as its partial product exceeds `C2`, which is sound because every `u_i >= 1`.
pub fn exhaustive_subset_attack(pk: &PublicKey, ct: &Ciphertext) -> Result<AttackReport> {
    let start = Instant::now();
    let n = pk.n();
    check_attack_size(n)?;
    let h = recover_hamming_weight(pk, &ct.c1)?;
    let u: Vec<&BigUint> = pk.u().collect();

    let mut search = Search { u: &u, target: &ct.c2, h, examined: 0, chosen: Vec::with_capacity(h), hits: Vec::new() };
    search.descend(0, &BigUint::one());

    let mut candidates: Vec<BitVector> = search
        .hits
        .iter()
        .map(|idx| BitVector::from_indices(n, idx).expect("indices are below n"))
        .collect();
    candidates.sort();
    Ok(AttackReport {
        strategy: Strategy::Exhaustive,
        n,
        recovered_h: h,
        candidates,
        subsets_examined: search.examined,
        exact_count: binomial(n, h)?,
        predicted_bound: entropy_bound(n, h)?,
        elapsed: start.elapsed(),
    })
}

struct Search<'a> {
    u: &'a [&'a BigUint],
    target: &'a BigUint,
    h: usize,
    examined: u64,
    chosen: Vec<usize>,
    hits: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn descend(&mut self, from: usize, partial: &BigUint) {
        if self.chosen.len() == self.h {
            self.examined += 1;
            if partial == self.target {
                self.hits.push(self.chosen.clone());
            }
            return;
        }
        let remaining = self.h - self.chosen.len();
        for i in from..=self.u.len() - remaining {
            let next = partial * self.u[i];
            if next > *self.target {
                continue;
            }
            self.chosen.push(i);
            self.descend(i + 1, &next);
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::tests::toy_public_key;
    use crate::original::encrypt;

    #[test]
    fn toy_ciphertext() {
        let pk = toy_public_key();
        let ct = Ciphertext { c1: BigUint::from(10816u32), c2: BigUint::from(372_020u32) };
        let report = exhaustive_subset_attack(&pk, &ct).unwrap();
        assert_eq!(report.recovered_h, 2);
        assert_eq!(report.candidates, vec!["01001".parse().unwrap()]);
        assert!(report.subsets_examined <= 10);
    }

    #[test]
    fn weight_one() {
        let pk = toy_public_key();
        for i in 0..5 {
            let (s, u) = pk.pairs()[i].clone();
            let report = exhaustive_subset_attack(&pk, &Ciphertext { c1: s, c2: u }).unwrap();
            assert_eq!(report.candidates, vec![BitVector::from_indices(5, &[i]).unwrap()]);
        }
    }

    #[test]
    fn every_toy_message_is_recovered() {
        let pk = toy_public_key();
        for mask in 1u64..32 {
            let m = BitVector::from_mask(mask, 5);
            let report = exhaustive_subset_attack(&pk, &encrypt(&pk, &m).unwrap()).unwrap();
            assert!(report.candidates.contains(&m));
            assert!(BigUint::from(report.subsets_examined) <= report.exact_count);
        }
    }
}
