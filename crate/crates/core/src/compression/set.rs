use serde::{Deserialize, Serialize};

use super::bits::Bits;
use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// Default bound on the number of candidates a generator may emit.
pub const DEFAULT_CANDIDATE_CAP: usize = 1_000_000;

/// Names the deterministic decoder of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderId {
    /// Grid correction around the empirical Gaussian fit.
    GaussianGrid,
    /// Grid correction around the median/MAD fit.
    RobustGaussianGrid,
    /// Grid correction around a fixed reference, ignoring the samples.
    FixedGaussianGrid,
    /// One component grid per public cluster, crossed with a weight grid.
    MixtureGrid,
    /// One grid per coordinate block.
    ProductGrid,
    /// Index into a list learner's output.
    ListIndex,
}

/// Sample-compression parameters: τ forwarded samples, `bits` side
/// information, decoder, and robustness r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionScheme {
    pub tau: usize,
    pub bits: usize,
    pub decoder: DecoderId,
    pub robustness: f64,
}

/// Encoder output: forwarded sample indices and side-information bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub indices: Vec<usize>,
    pub bits: Bits,
}

impl Encoding {
    pub fn check(&self, scheme: &CompressionScheme, source_len: usize) -> Result<()> {
        if self.bits.len() != scheme.bits {
            return Err(Error::MalformedEncoding(format!(
                "bitstring has {} bits, scheme uses {}",
                self.bits.len(),
                scheme.bits
            )));
        }
        if self.indices.len() != scheme.tau {
            return Err(Error::MalformedEncoding(format!(
                "{} indices forwarded, scheme uses {}",
                self.indices.len(),
                scheme.tau
            )));
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i >= source_len) {
            return Err(Error::MalformedEncoding(format!(
                "index {i} outside a dataset of {source_len} samples"
            )));
        }
        Ok(())
    }
}

/// How a candidate was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub indices: Vec<usize>,
    pub bitstring: Bits,
    pub grid_indices: Vec<usize>,
}

impl Provenance {
    pub fn encoding(&self) -> Encoding {
        Encoding {
            indices: self.indices.clone(),
            bits: self.bitstring.clone(),
        }
    }
}

/// Finite hypothesis class with per-hypothesis provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CandidateSetJson")]
pub struct CandidateSet {
    hypotheses: Vec<Distribution>,
    provenance: Vec<Provenance>,
}

#[derive(Deserialize)]
struct CandidateSetJson {
    hypotheses: Vec<Distribution>,
    provenance: Vec<Provenance>,
}

impl TryFrom<CandidateSetJson> for CandidateSet {
    type Error = Error;

    fn try_from(j: CandidateSetJson) -> Result<Self> {
        CandidateSet::new(j.hypotheses, j.provenance)
    }
}

impl CandidateSet {
    pub fn new(hypotheses: Vec<Distribution>, provenance: Vec<Provenance>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::Empty("candidate set"));
        }
        if hypotheses.len() != provenance.len() {
            return Err(Error::DimensionMismatch {
                expected: hypotheses.len(),
                got: provenance.len(),
            });
        }
        let d = hypotheses[0].dim();
        if let Some(h) = hypotheses.iter().find(|h| h.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.dim(),
            });
        }
        Ok(CandidateSet {
            hypotheses,
            provenance,
        })
    }

    /// Candidates without provenance, e.g. a user-supplied class.
    pub fn from_hypotheses(hypotheses: Vec<Distribution>) -> Result<Self> {
        let provenance = (0..hypotheses.len())
            .map(|i| Provenance {
                indices: Vec::new(),
                bitstring: Bits::default(),
                grid_indices: vec![i],
            })
            .collect();
        Self::new(hypotheses, provenance)
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hypotheses[0].dim()
    }

    pub fn hypotheses(&self) -> &[Distribution] {
        &self.hypotheses
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn get(&self, i: usize) -> Option<&Distribution> {
        self.hypotheses.get(i)
    }

    pub fn into_parts(self) -> (Vec<Distribution>, Vec<Provenance>) {
        (self.hypotheses, self.provenance)
    }
}

/// Fails with the required cap when `required` exceeds `cap`.
pub(crate) fn check_cap(what: &str, required: u128, cap: usize) -> Result<()> {
    if required > cap as u128 {
        return Err(Error::CapExceeded {
            what: what.to_string(),
            required,
            cap: cap as u128,
        });
    }
    Ok(())
}
