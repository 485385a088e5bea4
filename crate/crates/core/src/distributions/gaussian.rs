use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use serde::{Deserialize, Serialize};

use super::normal::LN_2PI;
use crate::error::{Error, Result};

/// Smallest admissible covariance eigenvalue.
pub const MIN_EIGENVALUE: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-9;

/// Multivariate normal N(mean, covariance) with a cached Cholesky factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianJson", into = "GaussianJson")]
pub struct GaussianParams {
    mean: Vec<f64>,
    /// Row-major d×d.
    covariance: Vec<f64>,
    /// Lower Cholesky factor, row-major d×d.
    chol: Vec<f64>,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianJson {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl TryFrom<GaussianJson> for GaussianParams {
    type Error = Error;

    fn try_from(j: GaussianJson) -> Result<Self> {
        GaussianParams::new(j.mean, j.covariance)
    }
}

impl From<GaussianParams> for GaussianJson {
    fn from(g: GaussianParams) -> Self {
        GaussianJson {
            covariance: g.covariance_rows(),
            mean: g.mean,
        }
    }
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let d = mean.len();
        if covariance.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: covariance.len(),
            });
        }
        let mut flat = Vec::with_capacity(d * d);
        for row in &covariance {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(mean, flat)
    }

    pub fn from_flat(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("mean", "dimension must be at least 1"));
        }
        if covariance.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: covariance.len(),
            });
        }
        if mean.iter().chain(&covariance).any(|v| !v.is_finite()) {
            return Err(Error::invalid("gaussian", "non-finite parameter"));
        }
        let scale = covariance.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (covariance[i * d + j] - covariance[j * d + i]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let m = DMatrix::from_row_slice(d, d, &covariance);
        let m = (&m + m.transpose()) * 0.5;
        let min_eig = if d == 1 {
            m[(0, 0)]
        } else {
            SymmetricEigen::new(m.clone()).eigenvalues.min()
        };
        if !(min_eig >= MIN_EIGENVALUE) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        let chol = m
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            })?
            .l();
        let mut chol_flat = vec![0.0; d * d];
        let mut log_det = 0.0;
        for i in 0..d {
            for j in 0..=i {
                chol_flat[i * d + j] = chol[(i, j)];
            }
            log_det += 2.0 * chol[(i, i)].ln();
        }
        let mut sym = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                sym[i * d + j] = m[(i, j)];
            }
        }
        Ok(GaussianParams {
            mean,
            covariance: sym,
            chol: chol_flat,
            log_norm: -0.5 * (d as f64 * LN_2PI + log_det),
        })
    }

    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        Self::from_flat(vec![mean], vec![variance])
    }

    pub fn standard(d: usize) -> Result<Self> {
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            cov[i * d + i] = 1.0;
        }
        Self::from_flat(vec![0.0; d], cov)
    }

    pub fn from_nalgebra(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        let mut flat = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                flat.push(cov[(i, j)]);
            }
        }
        Self::from_flat(mean.iter().copied().collect(), flat)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn covariance_rows(&self) -> Vec<Vec<f64>> {
        self.covariance
            .chunks(self.dim())
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mean)
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.covariance)
    }

    /// Mean and standard deviation of a univariate Gaussian.
    pub fn as_univariate(&self) -> Option<(f64, f64)> {
        (self.dim() == 1).then(|| (self.mean[0], self.covariance[0].sqrt()))
    }

    pub fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        if d == 1 {
            let z = (x[0] - self.mean[0]) / self.chol[0];
            return self.log_norm - 0.5 * z * z;
        }
        // forward substitution L z = x − μ
        let mut z = [0.0_f64; 8];
        let mut heap;
        let z: &mut [f64] = if d <= 8 {
            &mut z[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut q = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for j in 0..i {
                s -= self.chol[i * d + j] * z[j];
            }
            z[i] = s / self.chol[i * d + i];
            q += z[i] * z[i];
        }
        self.log_norm - 0.5 * q
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.log_density_unchecked(x))
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            let mut v = self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += self.chol[i * d + j] * zj;
            }
            out.push(v);
        }
    }

    /// Symmetric square root Σ^{1/2} and its inverse.
    pub fn sqrt_covariance(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.covariance_matrix());
        let q = &eig.eigenvectors;
        let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let inv_root = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
        (q * root * q.transpose(), q * inv_root * q.transpose())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.covariance_matrix())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}
