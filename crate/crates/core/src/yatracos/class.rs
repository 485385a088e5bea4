use serde::{Deserialize, Serialize};

use super::finite::{FiniteDist, MAX_DOMAIN};
use crate::error::{Error, Result};

/// Subsets of {0, …, D−1} as bit masks, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisSet {
    domain: usize,
    masks: Vec<u64>,
}

impl HypothesisSet {
    /// Drops repeated masks, keeping first occurrences.
    pub fn new(domain: usize, masks: Vec<u64>) -> Result<Self> {
        if domain == 0 || domain > MAX_DOMAIN {
            return Err(Error::invalid(
                "domain",
                format!("must lie in 1..={MAX_DOMAIN}"),
            ));
        }
        let full = full_mask(domain);
        if let Some(m) = masks.iter().find(|&&m| m & !full != 0) {
            return Err(Error::invalid(
                "masks",
                format!("{m:#x} has elements outside the domain"),
            ));
        }
        let mut out: Vec<u64> = Vec::with_capacity(masks.len());
        for m in masks {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(HypothesisSet { domain, masks: out })
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

pub(crate) fn full_mask(domain: usize) -> u64 {
    if domain == 64 {
        u64::MAX
    } else {
        (1u64 << domain) - 1
    }
}

/// Sets {x : p(x) > q(x)} over ordered pairs p ≠ q (by position), in
/// pair order, deduplicated; the empty set is kept.
pub fn yatracos_class(q: &[FiniteDist]) -> Result<HypothesisSet> {
    if q.len() < 2 {
        return Err(Error::invalid("Q", "need at least two distributions"));
    }
    let domain = q[0].domain_size();
    if let Some(p) = q.iter().find(|p| p.domain_size() != domain) {
        return Err(Error::DimensionMismatch {
            expected: domain,
            got: p.domain_size(),
        });
    }
    let mut masks = Vec::new();
    for (i, p) in q.iter().enumerate() {
        for (j, r) in q.iter().enumerate() {
            if i != j {
                masks.push(crate::selection::finite_set(p, r, domain));
            }
        }
    }
    HypothesisSet::new(domain, masks)
}
