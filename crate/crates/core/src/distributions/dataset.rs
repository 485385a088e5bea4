use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataRole {
    #[default]
    Public,
    Private,
}

/// An ordered sample of equal-length real vectors, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetJson", into = "DatasetJson")]
pub struct Dataset {
    values: Vec<f64>,
    dim: usize,
    role: DataRole,
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    #[serde(default)]
    role: DataRole,
    points: Vec<Vec<f64>>,
}

impl TryFrom<DatasetJson> for Dataset {
    type Error = Error;
    fn try_from(j: DatasetJson) -> Result<Self> {
        Dataset::new(j.points, j.role)
    }
}

impl From<Dataset> for DatasetJson {
    fn from(d: Dataset) -> Self {
        DatasetJson {
            role: d.role,
            points: d.iter().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, role: DataRole) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(1);
        if dim == 0 {
            return Err(Error::invalid("points", "zero-dimensional point"));
        }
        let mut values = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("points", "non-finite coordinate"));
            }
            values.extend_from_slice(p);
        }
        Ok(Dataset { values, dim, role })
    }

    pub fn from_flat(values: Vec<f64>, dim: usize, role: DataRole) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::invalid("dim", "length is not a multiple of dim"));
        }
        Ok(Dataset { values, dim, role })
    }

    /// Univariate dataset.
    pub fn scalar(values: Vec<f64>, role: DataRole) -> Self {
        Dataset {
            values,
            dim: 1,
            role,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn role(&self) -> DataRole {
        self.role
    }

    pub fn with_role(mut self, role: DataRole) -> Self {
        self.role = role;
        self
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Subset by indices, preserving their order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.point(i));
        }
        Dataset {
            values,
            dim: self.dim,
            role: self.role,
        }
    }

    /// Copy with point `i` replaced; used to build neighbouring datasets.
    pub fn replace(&self, i: usize, point: &[f64]) -> Result<Dataset> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let mut out = self.clone();
        out.values[i * self.dim..(i + 1) * self.dim].copy_from_slice(point);
        Ok(out)
    }

    /// Coordinate `c` of every point.
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.iter().map(|p| p[c]).collect()
    }

    /// Coordinates `range` of every point as a new dataset.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Dataset {
        let dim = range.len();
        let mut values = Vec::with_capacity(self.len() * dim);
        for p in self.iter() {
            values.extend_from_slice(&p[range.clone()]);
        }
        Dataset {
            values,
            dim,
            role: self.role,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_points() {
        let err = Dataset::new(vec![vec![0.0, 1.0], vec![2.0]], DataRole::Public).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        ));
    }

    #[test]
    fn json_shape() {
        let d = Dataset::new(vec![vec![1.5], vec![-2.0]], DataRole::Private).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"role":"private","points":[[1.5],[-2.0]]}"#);
        let back: Dataset = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
