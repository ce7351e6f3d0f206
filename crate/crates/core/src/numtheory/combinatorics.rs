use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

fn check_domain(n: usize, h: usize) -> Result<()> {
    if h > n {
        Err(Error::Domain(format!("weight {h} exceeds length {n}")))
    } else {
        Ok(())
    }
}

/// Exact binomial coefficient `C(n, h)`.
pub fn binomial(n: usize, h: usize) -> Result<BigUint> {
    check_domain(n, h)?;
    let h = h.min(n - h);
    let mut acc = BigUint::one();
    for i in 0..h {
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

/// `H(l) = -l lg l - (1 - l) lg (1 - l)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda >= 1.0 {
        return 0.0;
    }
    -lambda * lambda.log2() - (1.0 - lambda) * (1.0 - lambda).log2()
}

/// `2^(n H(h/n))`, the entropy upper bound on `C(n, h)`.
pub fn entropy_bound(n: usize, h: usize) -> Result<f64> {
    check_domain(n, h)?;
    if n == 0 {
        return Ok(1.0);
    }
    Ok((n as f64 * binary_entropy(h as f64 / n as f64)).exp2())
}

/// Weight-`k` subsets of `{0, .., n-1}` as sorted index vectors, in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // Rightmost index that can still move right.
        if let Some(i) = (0..k).rev().find(|&i| next[i] < self.n - k + i) {
            next[i] += 1;
            for j in i + 1..k {
                next[j] = next[j - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}
