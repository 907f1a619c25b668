//! Shapley value of a coalition's members for an arbitrary worth function.

use crate::error::{Error, Result};
use crate::partition::Coalition;

/// Largest coalition the exact formula is run on (2^k worth evaluations).
pub const MAX_SHAPLEY_SIZE: usize = 12;

/// Shares of the members of `c` (increasing member order). `worth` is called
/// once per nonempty subset of `c`; the empty set is worth 0.
pub fn shapley_within(c: Coalition, mut worth: impl FnMut(Coalition) -> f64) -> Result<Vec<f64>> {
    let members = c.to_vec();
    let k = members.len();
    if k > MAX_SHAPLEY_SIZE {
        return Err(Error::cap("Shapley coalition", k, MAX_SHAPLEY_SIZE));
    }
    if k == 1 {
        return Ok(vec![worth(c)]);
    }
    let to_global = |local: usize| -> Coalition {
        let bits = (0..k)
            .filter(|j| local & (1 << j) != 0)
            .fold(0u64, |acc, j| acc | 1 << (members[j] - 1));
        Coalition::from_bits(bits).expect("nonempty")
    };
    let mut v = vec![0.0f64; 1 << k];
    for (local, slot) in v.iter_mut().enumerate().skip(1) {
        *slot = worth(to_global(local));
    }
    // weight for |S| = s is s!(k-s-1)!/k!
    let weight: Vec<f64> = (0..k).map(|s| 1.0 / (k as f64 * binom(k - 1, s))).collect();
    let mut out = vec![0.0f64; k];
    for (i, slot) in out.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for s in 0..(1usize << k) {
            if s & bit == 0 {
                acc += weight[s.count_ones() as usize] * (v[s | bit] - v[s]);
            }
        }
        *slot = acc;
    }
    Ok(out)
}

fn binom(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}
