//! Candidate sets for mixtures and products, built from per-component or
//! per-coordinate sets.

use serde::{Deserialize, Serialize};

use super::bits::Bits;
use super::gaussian_grid::{odometer_mixed, Anchor, GaussianGrid};
use super::grid::GridSpec;
use super::set::{check_cap, CandidateSet, CompressionScheme, DecoderId, Provenance};
use crate::distributions::{Dataset, Distribution, MixtureParams, ProductParams};
use crate::error::{Error, Result};

/// Weight vectors on the simplex with coordinates in multiples of 1/N,
/// N = round(1/step), ordered lexicographically.
pub fn simplex_grid(k: usize, step: f64) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::invalid("weight_step", "must lie in (0, 1]"));
    }
    let n = (1.0 / step).round() as usize;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    compositions(n, k, &mut cur, &mut out);
    Ok(out
        .into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / n as f64).collect())
        .collect())
}

fn compositions(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        cur.push(left);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for v in 0..=left {
        cur.push(v);
        compositions(left - v, parts - 1, cur, out);
        cur.pop();
    }
}

fn bits_for(n: usize) -> u32 {
    usize::BITS - n.saturating_sub(1).leading_zeros()
}

fn product_size(sets: &[CandidateSet]) -> u128 {
    sets.iter()
        .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
}

fn joined(sets: &[CandidateSet], pick: &[usize]) -> Provenance {
    let mut p = Provenance {
        indices: Vec::new(),
        bitstring: Bits::default(),
        grid_indices: Vec::new(),
    };
    for (s, &i) in sets.iter().zip(pick) {
        let q = &s.provenance()[i];
        p.indices.extend_from_slice(&q.indices);
        p.bitstring.extend(&q.bitstring);
        p.grid_indices.extend_from_slice(&q.grid_indices);
    }
    p
}

/// One candidate per component crossed with every weight vector of the
/// simplex grid. Components vary slowest, the first slowest of all.
pub fn mixture_candidates(
    per_component: &[CandidateSet],
    weight_step: f64,
    cap: usize,
) -> Result<CandidateSet> {
    if per_component.is_empty() {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if per_component.len() == 1 {
        check_cap("mixture candidates", per_component[0].len() as u128, cap)?;
        return Ok(per_component[0].clone());
    }
    let weights = simplex_grid(per_component.len(), weight_step)?;
    let total = product_size(per_component).saturating_mul(weights.len() as u128);
    check_cap("mixture candidates", total, cap)?;
    let w_bits = bits_for(weights.len());
    let radix: Vec<usize> = per_component.iter().map(CandidateSet::len).collect();
    let mut hyps = Vec::with_capacity(total as usize);
    let mut prov = Vec::with_capacity(total as usize);
    let mut pick = vec![0usize; per_component.len()];
    loop {
        let comps: Vec<Distribution> = per_component
            .iter()
            .zip(&pick)
            .map(|(s, &i)| s.hypotheses()[i].clone())
            .collect();
        let base = joined(per_component, &pick);
        for (wi, w) in weights.iter().enumerate() {
            hyps.push(MixtureParams::new(comps.clone(), w.clone())?.into());
            let mut p = base.clone();
            p.bitstring.push_uint(wi, w_bits);
            p.grid_indices.push(wi);
            prov.push(p);
        }
        if !odometer_mixed(&mut pick, &radix) {
            break;
        }
    }
    CandidateSet::new(hyps, prov)
}

/// Cartesian product of per-coordinate candidate sets.
pub fn product_candidates(per_coordinate: &[CandidateSet], cap: usize) -> Result<CandidateSet> {
    if per_coordinate.is_empty() {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let total = product_size(per_coordinate);
    check_cap("product candidates", total, cap)?;
    let radix: Vec<usize> = per_coordinate.iter().map(CandidateSet::len).collect();
    let mut hyps = Vec::with_capacity(total as usize);
    let mut prov = Vec::with_capacity(total as usize);
    let mut pick = vec![0usize; per_coordinate.len()];
    loop {
        let factors: Vec<Distribution> = per_coordinate
            .iter()
            .zip(&pick)
            .map(|(s, &i)| s.hypotheses()[i].clone())
            .collect();
        hyps.push(ProductParams::new(factors)?.into());
        prov.push(joined(per_coordinate, &pick));
        if !odometer_mixed(&mut pick, &radix) {
            break;
        }
    }
    CandidateSet::new(hyps, prov)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Deterministic Lloyd clustering; returns a cluster label per point.
/// One-dimensional data starts from quantiles; otherwise from farthest-point
/// seeding beginning at the point nearest the mean.
pub fn kmeans(data: &Dataset, k: usize, iterations: usize) -> Result<Vec<usize>> {
    if k == 0 || data.len() < k {
        return Err(Error::TooFewSamples {
            needed: k.max(1),
            got: data.len(),
        });
    }
    let d = data.dim();
    let mut centers: Vec<Vec<f64>> = if d == 1 {
        let mut v = data.values().to_vec();
        v.sort_by(f64::total_cmp);
        (0..k)
            .map(|j| vec![v[((2 * j + 1) * v.len() / (2 * k)).min(v.len() - 1)]])
            .collect()
    } else {
        let n = data.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|c| data.column(c).iter().sum::<f64>() / n)
            .collect();
        let first = (0..data.len())
            .min_by(|&a, &b| {
                sq_dist(data.point(a), &mean).total_cmp(&sq_dist(data.point(b), &mean))
            })
            .unwrap();
        let mut cs = vec![data.point(first).to_vec()];
        while cs.len() < k {
            let far = (0..data.len())
                .max_by(|&a, &b| {
                    let da = cs
                        .iter()
                        .map(|c| sq_dist(data.point(a), c))
                        .fold(f64::INFINITY, f64::min);
                    let db = cs
                        .iter()
                        .map(|c| sq_dist(data.point(b), c))
                        .fold(f64::INFINITY, f64::min);
                    da.total_cmp(&db).then(b.cmp(&a))
                })
                .unwrap();
            cs.push(data.point(far).to_vec());
        }
        cs
    };
    let mut labels = vec![usize::MAX; data.len()];
    for _ in 0..iterations.max(1) {
        let mut changed = false;
        for (i, x) in data.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(x, &centers[a]).total_cmp(&sq_dist(x, &centers[b])))
                .unwrap();
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in data.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    Ok(labels)
}

/// Mixture candidates from public data: cluster into k groups, build a
/// component grid around each cluster's fit, and cross with a weight grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureGrid {
    pub k: usize,
    pub component_grid: GridSpec,
    pub weight_step: f64,
}

impl MixtureGrid {
    /// Component grid for accuracy α: mean offsets {−2α, …, 2α} in steps of
    /// α and covariance corrections {−2α, 0, 2α}, with weights in steps of
    /// 0.1.
    pub fn for_accuracy(k: usize, alpha: f64) -> Self {
        MixtureGrid {
            k,
            component_grid: GridSpec {
                mu_range: 2.0 * alpha,
                mu_step: alpha,
                sigma_range: (-2.0 * alpha, 2.0 * alpha),
                sigma_step: 2.0 * alpha,
            },
            weight_step: 0.1,
        }
    }

    pub fn scheme(&self, m: usize, dim: usize) -> Result<CompressionScheme> {
        let comp = GaussianGrid::new(self.component_grid, dim, Anchor::Empirical)?;
        let w = if self.k > 1 {
            bits_for(simplex_grid(self.k, self.weight_step)?.len()) as usize
        } else {
            0
        };
        Ok(CompressionScheme {
            tau: m,
            bits: self.k * comp.bit_width() + w,
            decoder: DecoderId::MixtureGrid,
            robustness: 0.0,
        })
    }

    pub fn candidates(&self, public: &Dataset, cap: usize) -> Result<CandidateSet> {
        let labels = kmeans(public, self.k, 200)?;
        let comp = GaussianGrid::new(self.component_grid, public.dim(), Anchor::Empirical)?;
        let mut sets = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let idx: Vec<usize> = (0..public.len()).filter(|&i| labels[i] == j).collect();
            let set = comp.candidates(&public.select(&idx), cap)?;
            // provenance indices refer to the full public sample
            let (hyps, mut prov) = set.into_parts();
            for p in &mut prov {
                p.indices = p.indices.iter().map(|&i| idx[i]).collect();
            }
            sets.push(CandidateSet::new(hyps, prov)?);
        }
        mixture_candidates(&sets, self.weight_step, cap)
    }
}
