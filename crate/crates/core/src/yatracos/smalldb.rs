//! SmallDB by exhaustive enumeration: an exponential mechanism over every
//! multiset of size k drawn from the (representative) domain.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::selection::PrivacyBudget;

/// Largest number of databases enumerated.
pub const SMALLDB_CAP: u128 = 10_000_000;

/// Database size: from accuracy, k = ⌈ln|Ĥ| / α²⌉, or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbSize {
    Theory,
    Fixed(usize),
}

impl DbSize {
    pub fn resolve(self, hypotheses: usize, alpha: f64) -> Result<usize> {
        match self {
            DbSize::Fixed(0) => Err(Error::invalid("db_size", "must be at least 1")),
            DbSize::Fixed(k) => Ok(k),
            DbSize::Theory => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::invalid("alpha", "must lie in (0, 1]"));
                }
                Ok((((hypotheses.max(1) as f64).ln() / (alpha * alpha)).ceil() as usize).max(1))
            }
        }
    }
}

/// C(n + k − 1, k), saturating.
pub fn multiset_count(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc·(n−1+i)/i stays integral at every step
        acc = match acc.checked_mul(n as u128 - 1 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDbResult {
    pub db_size: usize,
    pub databases: u128,
    /// Chosen database as counts per domain element.
    pub chosen: Vec<usize>,
    /// ĝ(ĥ): mass of the chosen database on each query.
    pub estimates: Vec<f64>,
    pub utility: f64,
}

struct Queries {
    /// Members of each query, as domain indices.
    members: Vec<Vec<usize>>,
    /// Empirical mass of each query.
    empirical: Vec<f64>,
}

impl Queries {
    fn new(hist: &[usize], masks: &[u64]) -> Result<Self> {
        let n: usize = hist.iter().sum();
        if n == 0 {
            return Err(Error::Empty("private sample"));
        }
        let members: Vec<Vec<usize>> = masks
            .iter()
            .map(|m| (0..hist.len()).filter(|&x| m >> x & 1 == 1).collect())
            .collect();
        let empirical = members
            .iter()
            .map(|xs| xs.iter().map(|&x| hist[x]).sum::<usize>() as f64 / n as f64)
            .collect();
        Ok(Queries { members, empirical })
    }

    fn utility(&self, counts: &[usize], k: usize) -> f64 {
        let mut worst = 0.0_f64;
        for (xs, e) in self.members.iter().zip(&self.empirical) {
            let mass = xs.iter().map(|&x| counts[x]).sum::<usize>() as f64 / k as f64;
            worst = worst.max((mass - e).abs());
        }
        -worst
    }

    fn estimates(&self, counts: &[usize], k: usize) -> Vec<f64> {
        self.members
            .iter()
            .map(|xs| xs.iter().map(|&x| counts[x]).sum::<usize>() as f64 / k as f64)
            .collect()
    }
}

/// Visits every count vector of length `n` summing to `k`, in
/// lexicographically decreasing order of the first entry onward.
fn for_each_db(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut c = vec![0usize; n];
    c[0] = k;
    loop {
        f(&c);
        // find the rightmost nonzero entry before the last position
        let Some(i) = (0..n - 1).rev().find(|&i| c[i] > 0) else {
            return;
        };
        c[i] -= 1;
        let tail = c[n - 1];
        c[n - 1] = 0;
        c[i + 1] = tail + 1;
    }
}

fn check_inputs(hist: &[usize], k: usize) -> Result<u128> {
    if hist.is_empty() {
        return Err(Error::Empty("domain"));
    }
    let count = multiset_count(hist.len(), k);
    if count > SMALLDB_CAP {
        return Err(Error::CapExceeded {
            what: format!("SmallDB databases (domain {}, size {k})", hist.len()),
            required: count,
            cap: SMALLDB_CAP,
        });
    }
    Ok(count)
}

/// Private estimates of every query mass. `hist` counts private samples per
/// domain element; `masks` are queries over the same domain.
pub fn smalldb(
    hist: &[usize],
    masks: &[u64],
    budget: PrivacyBudget,
    k: usize,
    seed: RngSeed,
) -> Result<SmallDbResult> {
    let databases = check_inputs(hist, k)?;
    let q = Queries::new(hist, masks)?;
    let n: usize = hist.iter().sum();
    let scale = budget.epsilon() * n as f64 / 2.0;
    // pass 1: streaming log-sum-exp of the scores
    let (mut max, mut sum) = (f64::NEG_INFINITY, 0.0);
    for_each_db(hist.len(), k, |c| {
        let s = scale * q.utility(c, k);
        if s > max {
            sum = sum * (max - s).exp() + 1.0;
            max = s;
        } else {
            sum += (s - max).exp();
        }
    });
    // pass 2: inverse-CDF draw
    let target = seed.rng().random::<f64>() * sum;
    let mut acc = 0.0;
    let mut chosen: Option<Vec<usize>> = None;
    let mut last_positive: Option<Vec<usize>> = None;
    for_each_db(hist.len(), k, |c| {
        if chosen.is_some() {
            return;
        }
        let w = (scale * q.utility(c, k) - max).exp();
        acc += w;
        if w > 0.0 {
            last_positive = Some(c.to_vec());
        }
        if target < acc {
            chosen = Some(c.to_vec());
        }
    });
    let chosen = chosen.or(last_positive).expect("at least one database");
    Ok(SmallDbResult {
        db_size: k,
        databases,
        estimates: q.estimates(&chosen, k),
        utility: q.utility(&chosen, k),
        chosen,
    })
}

/// Every database with its utility and log-probability, in enumeration
/// order. Intended for audits on small instances.
pub fn smalldb_distribution(
    hist: &[usize],
    masks: &[u64],
    budget: PrivacyBudget,
    k: usize,
) -> Result<Vec<(Vec<usize>, f64, f64)>> {
    check_inputs(hist, k)?;
    let q = Queries::new(hist, masks)?;
    let n: usize = hist.iter().sum();
    let mut dbs = Vec::new();
    let mut utils = Vec::new();
    for_each_db(hist.len(), k, |c| {
        dbs.push(c.to_vec());
        utils.push(q.utility(c, k));
    });
    let lp = crate::selection::mechanism_log_probabilities(&utils, n, budget)?;
    Ok(dbs
        .into_iter()
        .zip(utils)
        .zip(lp)
        .map(|((d, u), l)| (d, u, l))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eps(e: f64) -> PrivacyBudget {
        PrivacyBudget::new(e).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        for (n, k) in [(2, 2), (3, 4), (8, 5), (1, 3)] {
            let mut seen = 0u128;
            for_each_db(n, k, |c| {
                assert_eq!(c.iter().sum::<usize>(), k);
                seen += 1;
            });
            assert_eq!(seen, multiset_count(n, k));
        }
        assert_eq!(multiset_count(8, 16), 245_157);
        assert_eq!(multiset_count(2, 2), 3);
    }

    #[test]
    fn two_element_example() {
        // domain {a, b}, Ĥ = {{a}}, data (a, a, b, b)
        let d = smalldb_distribution(&[2, 2], &[0b01], eps(1.0), 2).unwrap();
        let utils: Vec<(Vec<usize>, f64)> = d.iter().map(|(c, u, _)| (c.clone(), *u)).collect();
        assert_eq!(
            utils,
            vec![(vec![2, 0], -0.5), (vec![1, 1], 0.0), (vec![0, 2], -0.5)]
        );
        // softmax with scores ε·n·u/2 = (−1, 0, −1)
        let z = 1.0 + 2.0 * (-1.0f64).exp();
        assert_relative_eq!(d[1].2.exp(), 1.0 / z, epsilon = 1e-12);
        assert_relative_eq!(d[0].2.exp(), (-1.0f64).exp() / z, epsilon = 1e-12);
    }

    #[test]
    fn large_epsilon_is_sharp() {
        let d = smalldb_distribution(&[2, 2], &[0b01], eps(1000.0), 2).unwrap();
        assert!(d[1].2.exp() >= 1.0 - 1e-6);
        let r = smalldb(&[2, 2], &[0b01], eps(1000.0), 2, RngSeed(4)).unwrap();
        assert_eq!(r.chosen, vec![1, 1]);
        assert_eq!(r.estimates, vec![0.5]);
    }

    #[test]
    fn empty_query_is_uniform() {
        let d = smalldb_distribution(&[3, 1], &[0], eps(1.0), 2).unwrap();
        for (_, u, l) in &d {
            assert_eq!(*u, 0.0);
            assert_relative_eq!(l.exp(), 1.0 / 3.0, epsilon = 1e-12);
        }
        assert_eq!(
            smalldb(&[3, 1], &[0], eps(1.0), 2, RngSeed(0))
                .unwrap()
                .estimates,
            vec![0.0]
        );
    }

    #[test]
    fn sampler_matches_distribution() {
        let hist = [3, 1, 2];
        let masks = [0b011, 0b101];
        let d = smalldb_distribution(&hist, &masks, eps(0.5), 3).unwrap();
        let mut freq = vec![0usize; d.len()];
        let runs = 20_000;
        for s in 0..runs {
            let r = smalldb(&hist, &masks, eps(0.5), 3, RngSeed(s)).unwrap();
            freq[d.iter().position(|x| x.0 == r.chosen).unwrap()] += 1;
        }
        for (f, (_, _, l)) in freq.iter().zip(&d) {
            let p = l.exp();
            let se = (p * (1.0 - p) / runs as f64).sqrt();
            assert!((*f as f64 / runs as f64 - p).abs() < 5.0 * se + 1e-3);
        }
    }

    #[test]
    fn theory_size_and_cap() {
        assert_eq!(DbSize::Theory.resolve(12, 0.1).unwrap(), 249);
        assert_eq!(DbSize::Theory.resolve(1, 0.1).unwrap(), 1);
        assert!(matches!(
            smalldb(&[1; 8], &[1], eps(1.0), 249, RngSeed(0)),
            Err(Error::CapExceeded { .. })
        ));
    }
}
