//! Reducing a hypothesis class by how it labels the public sample, and the
//! representative domain of the reduced class.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::class::HypothesisSet;
use crate::error::{Error, Result};

/// Reduced class Ĥ and the map f: H → Ĥ (by index).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    pub reduced: HypothesisSet,
    /// `map[h]` is the index in `reduced` of f(h).
    pub map: Vec<usize>,
}

/// Mask of the distinct domain elements present in `public`.
pub fn support_mask(public: &[usize], domain: usize) -> Result<u64> {
    let mut s = 0u64;
    for &x in public {
        if x >= domain {
            return Err(Error::invalid(
                "public",
                format!("{x} outside a domain of size {domain}"),
            ));
        }
        s |= 1 << x;
    }
    Ok(s)
}

/// Groups hypotheses that label the public sample identically and keeps
/// the smallest mask of each group. Groups appear in order of first
/// occurrence in `h`.
pub fn public_cover(h: &HypothesisSet, public: &[usize]) -> Result<CoverResult> {
    if public.is_empty() {
        return Err(Error::Empty("public sample"));
    }
    let seen = support_mask(public, h.domain())?;
    let mut group_of: HashMap<u64, usize> = HashMap::new();
    let mut reps: Vec<u64> = Vec::new();
    let mut map = Vec::with_capacity(h.len());
    for &m in h.masks() {
        let label = m & seen;
        let g = *group_of.entry(label).or_insert_with(|| {
            reps.push(m);
            reps.len() - 1
        });
        reps[g] = reps[g].min(m);
        map.push(g);
    }
    Ok(CoverResult {
        reduced: HypothesisSet::new(h.domain(), reps)?,
        map,
    })
}

/// One representative element per distinct membership pattern across Ĥ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeDomain {
    /// Smallest element of each pattern class, ascending.
    pub representatives: Vec<usize>,
    /// `projection[x]` is the index in `representatives` of [x].
    pub projection: Vec<usize>,
}

impl RepresentativeDomain {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// A mask over the original domain, re-expressed over representatives.
    pub fn reduce_mask(&self, mask: u64) -> u64 {
        self.representatives
            .iter()
            .enumerate()
            .filter(|(_, &x)| mask >> x & 1 == 1)
            .fold(0u64, |m, (i, _)| m | 1 << i)
    }

    /// Counts of projected samples per representative.
    pub fn histogram(&self, data: &[usize]) -> Vec<usize> {
        let mut h = vec![0; self.len()];
        for &x in data {
            h[self.projection[x]] += 1;
        }
        h
    }
}

pub fn representative_domain(domain: usize, reduced: &HypothesisSet) -> RepresentativeDomain {
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut representatives = Vec::new();
    let mut projection = Vec::with_capacity(domain);
    for x in 0..domain {
        let pattern: Vec<bool> = reduced.masks().iter().map(|m| m >> x & 1 == 1).collect();
        let r = *index.entry(pattern).or_insert_with(|| {
            representatives.push(x);
            representatives.len() - 1
        });
        projection.push(r);
    }
    RepresentativeDomain {
        representatives,
        projection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use rand::Rng;

    #[test]
    fn identical_labelings_merge() {
        let h = HypothesisSet::new(4, vec![0b0011, 0b0111]).unwrap();
        // the sample never sees element 2, where the two differ
        let c = public_cover(&h, &[0, 1, 3]).unwrap();
        assert_eq!(c.reduced.masks(), &[0b0011]);
        assert_eq!(c.map, vec![0, 0]);
    }

    #[test]
    fn full_sample_is_identity() {
        let h = HypothesisSet::new(4, vec![0b0011, 0b0111, 0b1000]).unwrap();
        let c = public_cover(&h, &[0, 1, 2, 3]).unwrap();
        assert_eq!(c.reduced, h);
        assert_eq!(c.map, vec![0, 1, 2]);
    }

    #[test]
    fn cover_preserves_sample_labels() {
        let mut rng = RngSeed(1).rng();
        for _ in 0..50 {
            let masks: Vec<u64> = (0..10).map(|_| rng.random::<u64>() & 0xffff).collect();
            let h = HypothesisSet::new(16, masks).unwrap();
            let public: Vec<usize> = (0..6).map(|_| rng.random_range(0..16)).collect();
            let c = public_cover(&h, &public).unwrap();
            for (i, &m) in h.masks().iter().enumerate() {
                let r = c.reduced.masks()[c.map[i]];
                for &x in &public {
                    assert_eq!(m >> x & 1, r >> x & 1);
                }
                assert!(r <= m);
            }
        }
    }

    #[test]
    fn representative_domain_cases() {
        let empty = HypothesisSet::new(5, vec![0]).unwrap();
        assert_eq!(representative_domain(5, &empty).representatives, vec![0]);
        let shatter = HypothesisSet::new(3, vec![0b001, 0b010, 0b100]).unwrap();
        assert_eq!(
            representative_domain(3, &shatter).representatives,
            vec![0, 1, 2]
        );
    }

    #[test]
    fn projection_preserves_membership() {
        let mut rng = RngSeed(2).rng();
        for _ in 0..50 {
            let masks: Vec<u64> = (0..4).map(|_| rng.random::<u64>() & 0xffff).collect();
            let h = HypothesisSet::new(16, masks).unwrap();
            let rd = representative_domain(16, &h);
            for x in 0..16 {
                let rep = rd.representatives[rd.projection[x]];
                for &m in h.masks() {
                    assert_eq!(m >> x & 1, m >> rep & 1);
                    assert_eq!(rd.reduce_mask(m) >> rd.projection[x] & 1, m >> x & 1);
                }
            }
            let data: Vec<usize> = (0..30).map(|_| rng.random_range(0..16)).collect();
            let hist = rd.histogram(&data);
            for &m in h.masks() {
                let direct = data.iter().filter(|&&x| m >> x & 1 == 1).count();
                let reduced = rd.reduce_mask(m);
                let via: usize = (0..rd.len())
                    .filter(|i| reduced >> i & 1 == 1)
                    .map(|i| hist[i])
                    .sum();
                assert_eq!(direct, via);
            }
        }
    }
}
