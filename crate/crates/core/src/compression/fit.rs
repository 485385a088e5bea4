//! Anchor fits for the grid decoder.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::distributions::{Dataset, GaussianParams};
use crate::error::{Error, Result};

/// Relative ridge added to the empirical covariance.
pub const RIDGE: f64 = 1e-9;

/// Upper bound on concentration steps in the multivariate robust fit.
const C_STEPS: usize = 20;

/// MAD → standard deviation for normal data.
const MAD_SCALE: f64 = 1.482_602_218_505_602;

/// Empirical mean and population covariance plus λI, λ = 1e−9·trace/d.
pub fn gaussian_fit(data: &Dataset) -> Result<GaussianParams> {
    let d = data.dim();
    if data.len() < d + 1 {
        return Err(Error::TooFewSamples {
            needed: d + 1,
            got: data.len(),
        });
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; d];
    for x in data.iter() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![0.0; d * d];
    for x in data.iter() {
        for i in 0..d {
            let di = x[i] - mean[i];
            for j in 0..=i {
                cov[i * d + j] += di * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / n;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    regularize(mean, cov)
}

fn regularize(mean: Vec<f64>, mut cov: Vec<f64>) -> Result<GaussianParams> {
    let d = mean.len();
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    if !(trace > 0.0) {
        return Err(Error::SingularCovariance);
    }
    let lambda = RIDGE * trace / d as f64;
    for i in 0..d {
        cov[i * d + i] += lambda;
    }
    GaussianParams::from_flat(mean, cov).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::SingularCovariance,
        e => e,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Outlier-resistant anchor. In one dimension: median and 1.4826·MAD.
/// Otherwise: start from the half of the points nearest the coordinate-wise
/// median (in MAD-scaled distance), refine that half by concentration steps,
/// and rescale its covariance to be consistent under normality.
pub fn robust_gaussian_fit(data: &Dataset) -> Result<GaussianParams> {
    let d = data.dim();
    if data.len() < d + 1 {
        return Err(Error::TooFewSamples {
            needed: d + 1,
            got: data.len(),
        });
    }
    let mut center = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    for c in 0..d {
        let mut col = data.column(c);
        let med = median(&mut col);
        let mut dev: Vec<f64> = col.iter().map(|x| (x - med).abs()).collect();
        let mad = MAD_SCALE * median(&mut dev);
        center.push(med);
        scale.push(mad);
    }
    if d == 1 {
        let s = scale[0];
        if !(s > 0.0) {
            return Err(Error::SingularCovariance);
        }
        return regularize(center, vec![s * s]);
    }
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::SingularCovariance);
    }
    let mut dist: Vec<(f64, usize)> = data
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let r: f64 = x
                .iter()
                .zip(&center)
                .zip(&scale)
                .map(|((v, m), s)| ((v - m) / s).powi(2))
                .sum();
            (r, i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let h = data.len().div_ceil(2).max(d + 1);
    let mut idx: Vec<usize> = dist[..h].iter().map(|p| p.1).collect();
    idx.sort_unstable();
    let mut fit = gaussian_fit(&data.select(&idx))?;
    // Concentration steps: keep the half nearest the current fit in its own
    // Mahalanobis metric. A Euclidean half of a correlated cloud is not an
    // ellipsoid of the right shape, which biases the correlations.
    for _ in 0..C_STEPS {
        for (r, i) in dist.iter_mut() {
            *r = -fit.log_density_unchecked(data.point(*i));
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut next: Vec<usize> = dist[..h].iter().map(|p| p.1).collect();
        next.sort_unstable();
        if next == idx {
            break;
        }
        idx = next;
        fit = gaussian_fit(&data.select(&idx))?;
    }
    let center = fit.mean().to_vec();
    // the inner half of N(0, Σ) has covariance Σ·F_{d+2}(q)/F_d(q) with q the
    // χ²_d median, and F_d(q) = 1/2
    let chi_d = ChiSquared::new(d as f64).expect("positive dof");
    let chi_d2 = ChiSquared::new(d as f64 + 2.0).expect("positive dof");
    let q = chi_d.inverse_cdf(0.5);
    let factor = 0.5 / chi_d2.cdf(q);
    let cov = fit.covariance_matrix() * factor;
    GaussianParams::from_nalgebra(&DVector::from_column_slice(&center), &DMatrix::from(cov))
}
