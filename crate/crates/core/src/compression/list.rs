//! Converting a list learner into a compression scheme, and the list size
//! implied by a private learner.

use serde::{Deserialize, Serialize};

use crate::distributions::{tv_distance, Distribution};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Position of the target's nearest list entry and the bits to store it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListEncoding {
    pub index: usize,
    pub bits: u32,
}

/// Smallest index minimizing TV to `target`; costs ⌈log₂ ℓ⌉ bits.
/// Pairs without an exact TV path use a Monte-Carlo estimate.
pub fn compression_from_list_learner(
    list: &[Distribution],
    target: &Distribution,
    trials: usize,
    seed: RngSeed,
) -> Result<ListEncoding> {
    if list.is_empty() {
        return Err(Error::Empty("list learner output"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, q) in list.iter().enumerate() {
        let tv = tv_distance(target, q, trials, seed.derive(i as u64))?.value;
        if tv < best.1 {
            best = (i, tv);
        }
    }
    Ok(ListEncoding {
        index: best.0,
        bits: usize::BITS - (list.len() - 1).leading_zeros(),
    })
}

/// Size (10/9)·exp(ε·n) of the list extracted from an ε-DP learner using n
/// private samples.
pub fn packing_list_size(epsilon: f64, n: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", "must be positive and finite"));
    }
    Ok(10.0 / 9.0 * (epsilon * n as f64).exp())
}
