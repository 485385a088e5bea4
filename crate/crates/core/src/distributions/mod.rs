//! Parametric distributions: density evaluation, sampling, and total
//! variation distance.

mod dataset;
mod gaussian;
mod mixture;
pub mod normal;
mod product;
pub mod tv;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dataset::{DataRole, Dataset};
pub use gaussian::{GaussianParams, MIN_EIGENVALUE};
pub use mixture::MixtureParams;
pub use product::ProductParams;
pub use tv::{
    point_set_distance, tv_distance, tv_exact_gaussian_1d, tv_monte_carlo, Crossing, TvEstimate,
    TvMethod,
};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
pub use crate::yatracos::FiniteDist;

/// Any distribution the pipeline can evaluate and sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionJson", into = "DistributionJson")]
pub enum Distribution {
    Gaussian(GaussianParams),
    Mixture(MixtureParams),
    Product(ProductParams),
    Finite(FiniteDist),
}

impl From<GaussianParams> for Distribution {
    fn from(g: GaussianParams) -> Self {
        Distribution::Gaussian(g)
    }
}

impl From<MixtureParams> for Distribution {
    fn from(m: MixtureParams) -> Self {
        Distribution::Mixture(m)
    }
}

impl From<ProductParams> for Distribution {
    fn from(p: ProductParams) -> Self {
        Distribution::Product(p)
    }
}

impl From<FiniteDist> for Distribution {
    fn from(f: FiniteDist) -> Self {
        Distribution::Finite(f)
    }
}

impl Distribution {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::Gaussian(g) => g.dim(),
            Distribution::Mixture(m) => m.dim(),
            Distribution::Product(p) => p.dim(),
            Distribution::Finite(_) => 1,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Density (mass for finite distributions) at `x`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.density_unchecked(x))
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.log_density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Distribution::Gaussian(g) => g.log_density_unchecked(x).exp(),
            Distribution::Mixture(m) => m.density_unchecked(x),
            Distribution::Product(p) => p.log_density_unchecked(x).exp(),
            Distribution::Finite(f) => f.density_at(x[0]),
        }
    }

    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Distribution::Gaussian(g) => g.log_density_unchecked(x),
            Distribution::Product(p) => p.log_density_unchecked(x),
            _ => self.density_unchecked(x).ln(),
        }
    }

    /// Appends one draw to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Distribution::Gaussian(g) => g.sample_into(rng, out),
            Distribution::Mixture(m) => {
                let c = m.pick(rng.random());
                m.components()[c].sample_into(rng, out)
            }
            Distribution::Product(p) => {
                for f in p.factors() {
                    f.sample_into(rng, out);
                }
            }
            Distribution::Finite(f) => out.push(f.sample_index(rng) as f64),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
        role: DataRole,
    ) -> Dataset {
        let mut values = Vec::with_capacity(count * self.dim());
        for _ in 0..count {
            self.sample_into(rng, &mut values);
        }
        Dataset::from_flat(values, self.dim(), role).expect("dimension is positive")
    }

    /// `count` i.i.d. draws, reproducible from `seed`.
    pub fn sample(&self, count: usize, seed: RngSeed) -> Result<Dataset> {
        if count == 0 {
            return Err(Error::invalid("count", "must be at least 1"));
        }
        Ok(self.sample_with(count, &mut seed.rng(), DataRole::Public))
    }

    pub fn as_gaussian(&self) -> Option<&GaussianParams> {
        match self {
            Distribution::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteDist> {
        match self {
            Distribution::Finite(f) => Some(f),
            _ => None,
        }
    }

    /// (μ, σ) for a univariate Gaussian.
    pub fn as_univariate_gaussian(&self) -> Option<(f64, f64)> {
        self.as_gaussian().and_then(GaussianParams::as_univariate)
    }

    /// Flattens a univariate Gaussian or (nested) mixture of univariate
    /// Gaussians into (weight, μ, σ) triples.
    pub fn as_normal_mixture_1d(&self) -> Option<Vec<(f64, f64, f64)>> {
        match self {
            Distribution::Gaussian(g) => g.as_univariate().map(|(m, s)| vec![(1.0, m, s)]),
            Distribution::Mixture(m) => {
                let mut out = Vec::new();
                for (c, w) in m.components().iter().zip(m.weights()) {
                    for (cw, mu, sd) in c.as_normal_mixture_1d()? {
                        if w * cw > 0.0 {
                            out.push((w * cw, mu, sd));
                        }
                    }
                }
                Some(out)
            }
            Distribution::Product(p) if p.factors().len() == 1 => {
                p.factors()[0].as_normal_mixture_1d()
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Gaussian,
    Mixture,
    Product,
    Finite,
}

/// Wire form: `{kind, mean, covariance, weights, components, factors, masses}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DistributionJson {
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<DistributionJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<DistributionJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    masses: Option<Vec<f64>>,
}

fn missing(kind: &str, key: &str) -> Error {
    Error::invalid(key, format!("missing for kind `{kind}`"))
}

impl TryFrom<DistributionJson> for Distribution {
    type Error = Error;

    fn try_from(j: DistributionJson) -> Result<Self> {
        Ok(match j.kind {
            Kind::Gaussian => {
                let mean = j.mean.ok_or_else(|| missing("gaussian", "mean"))?;
                let cov = j
                    .covariance
                    .ok_or_else(|| missing("gaussian", "covariance"))?;
                GaussianParams::new(mean, cov)?.into()
            }
            Kind::Mixture => {
                let comps = j
                    .components
                    .ok_or_else(|| missing("mixture", "components"))?;
                let weights = j.weights.ok_or_else(|| missing("mixture", "weights"))?;
                let comps = comps
                    .into_iter()
                    .map(Distribution::try_from)
                    .collect::<Result<Vec<_>>>()?;
                MixtureParams::new(comps, weights)?.into()
            }
            Kind::Product => {
                let factors = j.factors.ok_or_else(|| missing("product", "factors"))?;
                let factors = factors
                    .into_iter()
                    .map(Distribution::try_from)
                    .collect::<Result<Vec<_>>>()?;
                ProductParams::new(factors)?.into()
            }
            Kind::Finite => {
                FiniteDist::new(j.masses.ok_or_else(|| missing("finite", "masses"))?)?.into()
            }
        })
    }
}

impl From<Distribution> for DistributionJson {
    fn from(d: Distribution) -> Self {
        let mut j = DistributionJson {
            kind: Kind::Gaussian,
            mean: None,
            covariance: None,
            weights: None,
            components: None,
            factors: None,
            masses: None,
        };
        match d {
            Distribution::Gaussian(g) => {
                j.mean = Some(g.mean().to_vec());
                j.covariance = Some(g.covariance_rows());
            }
            Distribution::Mixture(m) => {
                j.kind = Kind::Mixture;
                j.weights = Some(m.weights().to_vec());
                j.components = Some(m.components().iter().cloned().map(Into::into).collect());
            }
            Distribution::Product(p) => {
                j.kind = Kind::Product;
                j.factors = Some(p.factors().iter().cloned().map(Into::into).collect());
            }
            Distribution::Finite(f) => {
                j.kind = Kind::Finite;
                j.masses = Some(f.masses().to_vec());
            }
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn n1(mu: f64, var: f64) -> Distribution {
        GaussianParams::univariate(mu, var).unwrap().into()
    }

    #[test]
    fn mixture_density_midpoint() {
        let m: Distribution = MixtureParams::new(vec![n1(0.0, 1.0), n1(4.0, 1.0)], vec![0.5, 0.5])
            .unwrap()
            .into();
        // 0.5 φ(2) + 0.5 φ(−2) = φ(2)
        let phi2 = (-2.0_f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(m.density(&[2.0]).unwrap(), phi2, epsilon = 1e-15);
        assert_relative_eq!(phi2, 0.053_990_966_513_188, epsilon = 1e-12);
    }

    #[test]
    fn mixture_weights_must_sum_to_one() {
        assert!(
            MixtureParams::new(vec![n1(0.0, 1.0), n1(1.0, 1.0)], vec![0.5, 0.5 + 1e-9]).is_err()
        );
        assert!(MixtureParams::new(vec![], vec![]).is_err());
    }

    #[test]
    fn product_density_factorizes() {
        let p: Distribution = ProductParams::new(vec![n1(0.0, 1.0), n1(1.0, 4.0)])
            .unwrap()
            .into();
        let x = [0.3, -0.5];
        let expect = n1(0.0, 1.0).density(&[0.3]).unwrap() * n1(1.0, 4.0).density(&[-0.5]).unwrap();
        assert_relative_eq!(p.density(&x).unwrap(), expect, epsilon = 1e-15);
        assert!(p.density(&[0.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = n1(0.0, 1.0);
        let a = d.sample(5, RngSeed(7)).unwrap();
        let b = d.sample(5, RngSeed(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert_ne!(a, d.sample(5, RngSeed(8)).unwrap());
    }

    #[test]
    fn point_mass_samples_its_atom() {
        let d: Distribution = FiniteDist::new(vec![1.0]).unwrap().into();
        let s = d.sample(3, RngSeed(1)).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn sample_mean_concentrates() {
        let s = n1(3.0, 1.0).sample(100_000, RngSeed(11)).unwrap();
        let mean = s.values().iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 3.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let m: Distribution = MixtureParams::new(
            vec![
                n1(0.1, 0.3),
                GaussianParams::univariate(-2.0, 1.0 / 3.0).unwrap().into(),
            ],
            vec![0.25, 0.75],
        )
        .unwrap()
        .into();
        let s = serde_json::to_string(&m).unwrap();
        let back: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);

        let g: Distribution =
            serde_json::from_str(r#"{"kind":"gaussian","mean":[0],"covariance":[[1]]}"#).unwrap();
        assert_eq!(g.as_univariate_gaussian(), Some((0.0, 1.0)));

        let err = serde_json::from_str::<Distribution>(r#"{"kind":"gaussian","mean":[0]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("covariance"), "{err}");
    }
}
