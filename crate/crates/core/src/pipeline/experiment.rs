use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Family, LearnerConfig};
use super::learn::Learner;
use crate::audit::AuditLog;
use crate::compression::{Anchor, GridSpec, DEFAULT_CANDIDATE_CAP};
use crate::distributions::{
    tv_distance, DataRole, Distribution, GaussianParams, MixtureParams, ProductParams,
};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::selection::{PrivacyBudget, MIN_SCHEFFE_TRIALS};

/// Smallest pairwise TV between random mixture components.
pub const MIN_COMPONENT_SEPARATION: f64 = 0.2;
const MAX_TRUTH_ATTEMPTS: usize = 10_000;

/// Where the private-data distribution comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthSpec {
    Explicit {
        distribution: Distribution,
    },
    /// Fresh random truth per trial: coordinate means and covariance
    /// eigenvalues drawn uniformly from the given ranges.
    Random {
        mean_range: (f64, f64),
        variance_range: (f64, f64),
    },
}

impl Default for TruthSpec {
    fn default() -> Self {
        TruthSpec::Random {
            mean_range: (-50.0, 50.0),
            variance_range: (0.25, 4.0),
        }
    }
}

/// Where the public data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicSource {
    /// The private distribution itself.
    #[default]
    Same,
    /// A different fixed distribution.
    Explicit { distribution: Distribution },
    /// (1 − fraction)·truth + fraction·noise.
    Contaminated { fraction: f64, noise: Distribution },
}

/// A sweep over m × n × ε cells with `trials` runs per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_dim")]
    pub d: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub trials: usize,
    /// Target error; also the success threshold.
    pub alpha: f64,
    #[serde(default)]
    pub truth: TruthSpec,
    #[serde(default)]
    pub public: PublicSource,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub anchor: Anchor,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_cap")]
    pub candidate_cap: usize,
    #[serde(default = "default_mc")]
    pub mc_trials: usize,
    /// Monte Carlo draws for TV errors without a closed form.
    #[serde(default = "default_tv_trials")]
    pub tv_trials: usize,
    /// Also compute the best candidate's TV (costly outside 1-d).
    #[serde(default)]
    pub decompose: bool,
}

fn default_family() -> Family {
    Family::Gaussian
}

fn default_dim() -> usize {
    1
}

fn default_cap() -> usize {
    DEFAULT_CANDIDATE_CAP
}

fn default_mc() -> usize {
    4 * MIN_SCHEFFE_TRIALS
}

fn default_tv_trials() -> usize {
    20_000
}

impl ExperimentSpec {
    /// Single Gaussian cell with default settings.
    pub fn gaussian(m: usize, n: usize, epsilon: f64, trials: usize, alpha: f64) -> Self {
        ExperimentSpec {
            family: Family::Gaussian,
            d: 1,
            m: vec![m],
            n: vec![n],
            epsilon: vec![epsilon],
            trials,
            alpha,
            truth: TruthSpec::default(),
            public: PublicSource::Same,
            grid: None,
            anchor: Anchor::Empirical,
            shift: 0.0,
            candidate_cap: default_cap(),
            mc_trials: default_mc(),
            tv_trials: default_tv_trials(),
            decompose: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.is_empty() || self.n.is_empty() || self.epsilon.is_empty() {
            return Err(Error::invalid(
                "m/n/epsilon",
                "sweep lists must be nonempty",
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::invalid("d", "must be at least 1"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0) {
            return Err(Error::invalid(
                "n",
                format!("entries must be positive, got {n}"),
            ));
        }
        if let Some(&m) = self.m.iter().find(|&&m| m == 0) {
            return Err(Error::invalid(
                "m",
                format!("entries must be positive, got {m}"),
            ));
        }
        for &e in &self.epsilon {
            self.learner(e)?;
        }
        if let Family::Product { k } = self.family {
            if !self.d.is_multiple_of(k) {
                return Err(Error::invalid("family.k", "must divide d"));
            }
        }
        match &self.truth {
            TruthSpec::Explicit { distribution } if distribution.dim() != self.d => {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: distribution.dim(),
                })
            }
            TruthSpec::Random {
                mean_range,
                variance_range,
            } if !(mean_range.0 <= mean_range.1)
                || !(0.0 < variance_range.0 && variance_range.0 <= variance_range.1) =>
            {
                return Err(Error::invalid(
                    "truth",
                    "ranges must be ordered with positive variances",
                ));
            }
            _ => {}
        }
        match &self.public {
            PublicSource::Explicit { distribution } if distribution.dim() != self.d => {
                Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: distribution.dim(),
                })
            }
            PublicSource::Contaminated { fraction, noise } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::invalid("public.fraction", "must be in [0, 1]"));
                }
                if noise.dim() != self.d {
                    return Err(Error::DimensionMismatch {
                        expected: self.d,
                        got: noise.dim(),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn learner(&self, epsilon: f64) -> Result<LearnerConfig> {
        let cfg = LearnerConfig {
            alpha: self.alpha,
            beta: 0.1,
            epsilon: PrivacyBudget::new(epsilon)?,
            family: self.family,
            grid: self.grid,
            anchor: self.anchor.clone(),
            shift: self.shift,
            candidate_cap: self.candidate_cap,
            mc_trials: self.mc_trials,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One trial's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub family: String,
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub trial: usize,
    pub seed: u64,
    pub tv_error: f64,
    pub tv_ci: f64,
    pub candidates: usize,
    pub success: bool,
    /// TV of the closest candidate to the truth, when decomposed.
    #[serde(skip)]
    pub best_tv: Option<f64>,
}

impl TrialRecord {
    /// Excess of the realized error over the best candidate.
    pub fn regret(&self) -> Option<f64> {
        self.best_tv.map(|b| self.tv_error - b)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)
                .map_err(|e| Error::invalid("csv", e.to_string()))?;
        }
        w.flush()
            .map_err(|e| Error::invalid("csv", e.to_string()))?;
        Ok(())
    }

    /// Rows of one (m, n, ε) cell.
    pub fn cell(&self, m: usize, n: usize, epsilon: f64) -> impl Iterator<Item = &TrialRecord> {
        self.rows
            .iter()
            .filter(move |r| r.m == m && r.n == n && r.epsilon == epsilon)
    }

    pub fn success_rate(&self, m: usize, n: usize, epsilon: f64) -> f64 {
        let (hits, total) = self
            .cell(m, n, epsilon)
            .fold((0usize, 0usize), |(h, t), r| {
                (h + r.success as usize, t + 1)
            });
        hits as f64 / total.max(1) as f64
    }

    pub fn mean_error(&self, m: usize, n: usize, epsilon: f64) -> f64 {
        let (sum, total) = self
            .cell(m, n, epsilon)
            .fold((0.0, 0usize), |(s, t), r| (s + r.tv_error, t + 1));
        sum / total.max(1) as f64
    }
}

/// Runs every cell in m-major, then n, then ε order. Trials run in parallel;
/// each owns the seed `seed.derive2(cell, trial)`.
pub fn run_experiment(spec: &ExperimentSpec, seed: RngSeed) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &m in &spec.m {
        for &n in &spec.n {
            for &eps in &spec.epsilon {
                let cfg = spec.learner(eps)?;
                let cell_rows = (0..spec.trials)
                    .into_par_iter()
                    .map(|t| run_trial(spec, &cfg, m, n, t, seed.derive2(cell, t as u64)))
                    .collect::<Result<Vec<_>>>()?;
                rows.extend(cell_rows);
                cell += 1;
            }
        }
    }
    Ok(ExperimentReport { rows })
}

fn run_trial(
    spec: &ExperimentSpec,
    cfg: &LearnerConfig,
    m: usize,
    n: usize,
    trial: usize,
    seed: RngSeed,
) -> Result<TrialRecord> {
    let truth = match &spec.truth {
        TruthSpec::Explicit { distribution } => distribution.clone(),
        TruthSpec::Random {
            mean_range,
            variance_range,
        } => random_truth(
            spec.family,
            spec.d,
            *mean_range,
            *variance_range,
            seed.derive(0),
        )?,
    };
    let source = match &spec.public {
        PublicSource::Same => truth.clone(),
        PublicSource::Explicit { distribution } => distribution.clone(),
        PublicSource::Contaminated { fraction, noise } => MixtureParams::new(
            vec![truth.clone(), noise.clone()],
            vec![1.0 - fraction, *fraction],
        )?
        .into(),
    };
    let public = source.sample(m, seed.derive(1))?;
    let private = truth
        .sample(n, seed.derive(2))?
        .with_role(DataRole::Private);
    let mut audit = AuditLog::new();
    let learner = Learner::prepare(&public, cfg, seed.derive(3), &mut audit)?;
    let out = learner.select(&private, &mut audit)?;
    let tv = tv_distance(&out.distribution, &truth, spec.tv_trials, seed.derive(4))?;
    let best_tv = if spec.decompose {
        let mut best = f64::INFINITY;
        for (i, h) in learner.candidates().hypotheses().iter().enumerate() {
            best =
                best.min(tv_distance(h, &truth, spec.tv_trials, seed.derive2(5, i as u64))?.value);
        }
        Some(best)
    } else {
        None
    };
    Ok(TrialRecord {
        family: spec.family.name().to_string(),
        d: spec.d,
        k: spec.family.k(),
        m,
        n,
        epsilon: cfg.epsilon.epsilon(),
        trial,
        seed: seed.0,
        tv_error: tv.value,
        tv_ci: tv.half_width,
        candidates: out.candidates,
        success: tv.value <= spec.alpha,
        best_tv,
    })
}

fn random_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    mean_range: (f64, f64),
    variance_range: (f64, f64),
) -> Result<GaussianParams> {
    let mut uniform = |r: (f64, f64)| {
        if r.0 == r.1 {
            r.0
        } else {
            rng.random_range(r.0..r.1)
        }
    };
    let mean: Vec<f64> = (0..d).map(|_| uniform(mean_range)).collect();
    let vars: Vec<f64> = (0..d).map(|_| uniform(variance_range)).collect();
    if d == 1 {
        return GaussianParams::univariate(mean[0], vars[0]);
    }
    // Random rotation from the QR factor of a Gaussian matrix.
    let z = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = z.qr().q();
    let cov = &q * DMatrix::from_diagonal(&DVector::from_vec(vars)) * q.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianParams::from_nalgebra(&DVector::from_vec(mean), &cov)
}

/// A random member of `family` in dimension `d`. Mixture components are
/// redrawn until every pair is at least [`MIN_COMPONENT_SEPARATION`] apart
/// in TV.
pub fn random_truth(
    family: Family,
    d: usize,
    mean_range: (f64, f64),
    variance_range: (f64, f64),
    seed: RngSeed,
) -> Result<Distribution> {
    let mut rng = seed.rng();
    match family {
        Family::Gaussian => Ok(random_gaussian(&mut rng, d, mean_range, variance_range)?.into()),
        Family::Product { k } => {
            if !d.is_multiple_of(k) {
                return Err(Error::invalid("family.k", "must divide d"));
            }
            let factors = (0..k)
                .map(|_| {
                    random_gaussian(&mut rng, d / k, mean_range, variance_range)
                        .map(Distribution::from)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ProductParams::new(factors)?.into())
        }
        Family::Mixture { k, .. } => {
            for attempt in 0..MAX_TRUTH_ATTEMPTS {
                let comps = (0..k)
                    .map(|_| {
                        random_gaussian(&mut rng, d, mean_range, variance_range)
                            .map(Distribution::from)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut separated = true;
                'pairs: for i in 0..k {
                    for j in i + 1..k {
                        let tv = tv_distance(
                            &comps[i],
                            &comps[j],
                            2_000,
                            seed.derive2(attempt as u64, (i * k + j) as u64),
                        )?;
                        if tv.value < MIN_COMPONENT_SEPARATION {
                            separated = false;
                            break 'pairs;
                        }
                    }
                }
                if separated {
                    let raw: Vec<f64> = (0..k).map(|_| 1.0 + rng.random::<f64>()).collect();
                    let total: f64 = raw.iter().sum();
                    return Ok(
                        MixtureParams::new(comps, raw.iter().map(|w| w / total).collect())?.into(),
                    );
                }
            }
            Err(Error::invalid(
                "truth",
                "could not draw separated mixture components",
            ))
        }
    }
}
