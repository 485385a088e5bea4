use super::Distribution;
use crate::error::{Error, Result};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finite mixture Σ wᵢ qᵢ.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    components: Vec<Distribution>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MixtureParams {
    pub fn new(components: Vec<Distribution>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("mixture components"));
        }
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(
                "weights",
                "weights must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(
                "weights",
                format!("weights sum to {total}, not 1"),
            ));
        }
        let d = components[0].dim();
        if let Some(c) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: c.dim(),
            });
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(MixtureParams {
            components,
            weights,
            cumulative,
        })
    }

    pub fn components(&self) -> &[Distribution] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub(crate) fn density_unchecked(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| w * c.density_unchecked(x))
            .sum()
    }

    /// Component index for a uniform draw `u ∈ [0,1)`.
    pub(crate) fn pick(&self, u: f64) -> usize {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        self.cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or_else(|| {
                // u·total rounded up to the last boundary; take the last positive weight.
                self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
            })
    }
}
