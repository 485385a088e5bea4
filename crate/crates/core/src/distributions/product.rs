use super::Distribution;
use crate::error::{Error, Result};

/// Product distribution over concatenated coordinate blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductParams {
    factors: Vec<Distribution>,
    offsets: Vec<usize>,
}

impl ProductParams {
    pub fn new(factors: Vec<Distribution>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Empty("product factors"));
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for f in &factors {
            acc += f.dim();
            offsets.push(acc);
        }
        Ok(ProductParams { factors, offsets })
    }

    pub fn factors(&self) -> &[Distribution] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Coordinate range of factor `i`.
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.log_density_unchecked(&x[self.block(i)]))
            .sum()
    }
}
