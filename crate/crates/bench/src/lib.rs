//! Shared fixtures for the criterion benches.
//!
//! Every fixture is seeded, so two runs time exactly the same work.

use ppdl_core::{CandidateSet, Dataset, Distribution, GaussianParams, RngSeed};

/// `count` unit-variance normals with means spread evenly over `[-3, 3]`.
pub fn normal_candidates(count: usize) -> CandidateSet {
    let step = 6.0 / count.saturating_sub(1).max(1) as f64;
    let hypotheses = (0..count)
        .map(|i| {
            GaussianParams::univariate(-3.0 + step * i as f64, 1.0)
                .unwrap()
                .into()
        })
        .collect();
    CandidateSet::from_hypotheses(hypotheses).unwrap()
}

/// Private sample of `n` points from N(0.4, 1).
pub fn private_sample(n: usize, seed: RngSeed) -> Dataset {
    let truth: Distribution = GaussianParams::univariate(0.4, 1.0).unwrap().into();
    truth.sample(n, seed).unwrap()
}
