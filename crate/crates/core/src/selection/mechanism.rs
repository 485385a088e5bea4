use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Pure ε-DP budget (δ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrivacyBudget {
    epsilon: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", "must be positive and finite"));
        }
        Ok(PrivacyBudget { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl TryFrom<f64> for PrivacyBudget {
    type Error = Error;

    fn try_from(e: f64) -> Result<Self> {
        PrivacyBudget::new(e)
    }
}

impl From<PrivacyBudget> for f64 {
    fn from(b: PrivacyBudget) -> f64 {
        b.epsilon
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: usize,
    pub utilities: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Natural logs of `probabilities`, kept for ratio checks where the
    /// probabilities themselves underflow.
    #[serde(skip)]
    pub log_probabilities: Vec<f64>,
    pub epsilon: f64,
    pub n: usize,
}

/// Log-probabilities ∝ ε·n·uᵢ/2, normalized after subtracting the maximum.
pub fn mechanism_log_probabilities(
    utilities: &[f64],
    n: usize,
    budget: PrivacyBudget,
) -> Result<Vec<f64>> {
    if utilities.is_empty() {
        return Err(Error::Empty("utilities"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if utilities.iter().any(|u| !u.is_finite()) {
        return Err(Error::invalid("utilities", "must be finite"));
    }
    let scale = budget.epsilon() * n as f64 / 2.0;
    let scores: Vec<f64> = utilities.iter().map(|u| scale * u).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    Ok(scores.into_iter().map(|s| s - lse).collect())
}

/// Samples an index with probability ∝ exp(ε·n·uᵢ/2).
pub fn exponential_mechanism(
    utilities: &[f64],
    n: usize,
    budget: PrivacyBudget,
    seed: RngSeed,
) -> Result<SelectionResult> {
    let log_probabilities = mechanism_log_probabilities(utilities, n, budget)?;
    let probabilities: Vec<f64> = log_probabilities.iter().map(|l| l.exp()).collect();
    let total: f64 = probabilities.iter().sum();
    let target = seed.rng().random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if target < acc {
            chosen = Some(i);
            break;
        }
    }
    // rounding can leave the target at the very top; take the last
    // positive-probability index
    let chosen =
        chosen.unwrap_or_else(|| probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(0));
    Ok(SelectionResult {
        chosen,
        utilities: utilities.to_vec(),
        probabilities,
        log_probabilities,
        epsilon: budget.epsilon(),
        n,
    })
}
