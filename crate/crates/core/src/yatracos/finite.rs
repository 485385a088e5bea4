use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest domain handled by exact enumeration; masks are `u64`.
pub const MAX_DOMAIN: usize = 64;

const SUM_TOL: f64 = 1e-12;

/// Probability mass function on {0, …, D−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FiniteJson")]
pub struct FiniteDist {
    masses: Vec<f64>,
}

#[derive(Deserialize)]
struct FiniteJson {
    masses: Vec<f64>,
}

impl TryFrom<FiniteJson> for FiniteDist {
    type Error = Error;

    fn try_from(j: FiniteJson) -> Result<Self> {
        FiniteDist::new(j.masses)
    }
}

impl FiniteDist {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Empty("finite distribution"));
        }
        if masses.len() > MAX_DOMAIN {
            return Err(Error::invalid(
                "masses",
                format!("domain size {} exceeds {MAX_DOMAIN}", masses.len()),
            ));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::invalid(
                "masses",
                "masses must be finite and nonnegative",
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(
                "masses",
                format!("masses sum to {total}, not 1"),
            ));
        }
        Ok(FiniteDist { masses })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("masses", "weights must have positive sum"));
        }
        let mut masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // push the rounding residue onto the largest entry
        let resid = 1.0 - masses.iter().sum::<f64>();
        let imax = masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        masses[imax] += resid;
        Self::new(masses)
    }

    pub fn point_mass(domain: usize, at: usize) -> Result<Self> {
        let mut m = vec![0.0; domain];
        *m.get_mut(at)
            .ok_or_else(|| Error::invalid("at", "outside the domain"))? = 1.0;
        Self::new(m)
    }

    pub fn uniform(domain: usize) -> Result<Self> {
        Self::normalized(&vec![1.0; domain])
    }

    pub fn domain_size(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.masses.get(x).copied().unwrap_or(0.0)
    }

    /// Mass of the subset encoded by `mask` (bit x ↔ element x).
    pub fn mass_of(&self, mask: u64) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .filter(|(x, _)| mask >> x & 1 == 1)
            .map(|(_, m)| m)
            .sum()
    }

    /// Probability at a real-valued point; zero off the integer lattice.
    pub fn density_at(&self, x: f64) -> f64 {
        if x >= 0.0 && x.fract() == 0.0 {
            self.mass(x as usize)
        } else {
            0.0
        }
    }

    /// Exact total variation: half the L1 distance.
    pub fn tv(&self, other: &FiniteDist) -> f64 {
        let n = self.domain_size().max(other.domain_size());
        0.5 * (0..n)
            .map(|x| (self.mass(x) - other.mass(x)).abs())
            .sum::<f64>()
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, m) in self.masses.iter().enumerate() {
            acc += m;
            if u < acc {
                return i;
            }
        }
        self.masses.iter().rposition(|m| *m > 0.0).unwrap_or(0)
    }

    pub fn sample_indices<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<usize> {
        (0..count).map(|_| self.sample_index(rng)).collect()
    }
}
