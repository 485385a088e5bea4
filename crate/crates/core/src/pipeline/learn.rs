use serde::{Deserialize, Serialize};

use super::config::{Family, LearnerConfig};
use crate::audit::{AuditLog, Stage};
use crate::compression::{
    product_candidates, Anchor, CandidateSet, CompressionScheme, DecoderId, GaussianGrid,
    MixtureGrid,
};
use crate::distributions::{Dataset, Distribution};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::selection::{SelectionResult, Tournament};

/// Candidate set for `public` under `cfg`, with the scheme that produced it.
pub fn generate_candidates(
    public: &Dataset,
    cfg: &LearnerConfig,
) -> Result<(CandidateSet, CompressionScheme)> {
    cfg.validate()?;
    if public.is_empty() {
        return Err(Error::Empty("public dataset"));
    }
    let grid = cfg.effective_grid();
    let m = public.len();
    match cfg.family {
        Family::Gaussian => {
            let g = GaussianGrid::new(grid, public.dim(), cfg.anchor.clone())?;
            Ok((g.candidates(public, cfg.candidate_cap)?, g.scheme(m)))
        }
        Family::Mixture { k, weight_step } => {
            if cfg.anchor != Anchor::Empirical {
                return Err(Error::invalid(
                    "anchor",
                    "mixtures support only the empirical anchor",
                ));
            }
            let mg = MixtureGrid {
                k,
                component_grid: grid,
                weight_step,
            };
            Ok((
                mg.candidates(public, cfg.candidate_cap)?,
                mg.scheme(m, public.dim())?,
            ))
        }
        Family::Product { k } => {
            let d = public.dim();
            if !d.is_multiple_of(k) {
                return Err(Error::invalid(
                    "family.k",
                    format!("must divide the dimension {d}"),
                ));
            }
            let b = d / k;
            let g = GaussianGrid::new(grid, b, cfg.anchor.clone())?;
            let sets = (0..k)
                .map(|i| g.candidates(&public.columns(i * b..(i + 1) * b), cfg.candidate_cap))
                .collect::<Result<Vec<_>>>()?;
            let scheme = CompressionScheme {
                tau: m,
                bits: k * g.bit_width(),
                decoder: DecoderId::ProductGrid,
                robustness: cfg.robustness(),
            };
            Ok((product_candidates(&sets, cfg.candidate_cap)?, scheme))
        }
    }
}

/// A learner whose public-data work is finished. Private data enters only
/// through [`Learner::select`].
#[derive(Debug, Clone)]
pub struct Learner {
    cfg: LearnerConfig,
    candidates: CandidateSet,
    scheme: CompressionScheme,
    tournament: Tournament,
    seed: RngSeed,
}

/// Output of one public-private learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub distribution: Distribution,
    pub selection: SelectionResult,
    pub candidates: usize,
    pub scheme: CompressionScheme,
}

impl Learner {
    /// Builds candidates from `public` and every candidate-side Scheffé
    /// mass. `seed` also fixes the later mechanism draw.
    pub fn prepare(
        public: &Dataset,
        cfg: &LearnerConfig,
        seed: RngSeed,
        audit: &mut AuditLog,
    ) -> Result<Self> {
        audit.record(
            Stage::ReadPublic,
            format!("{} public samples", public.len()),
        );
        let (candidates, scheme) = generate_candidates(public, cfg)?;
        audit.record(
            Stage::CandidateGeneration,
            format!("{} candidates", candidates.len()),
        );
        let tournament = Tournament::prepare(&candidates, cfg.mc_trials, seed.derive(0))?;
        audit.record(
            Stage::CandidateMass,
            format!(
                "{:?} engine, {} candidates",
                tournament.engine(),
                tournament.len()
            ),
        );
        Ok(Learner {
            cfg: cfg.clone(),
            candidates,
            scheme,
            tournament,
            seed,
        })
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn scheme(&self) -> &CompressionScheme {
        &self.scheme
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    /// The ε-DP selection step; the only place private samples are read.
    pub fn select(&self, private: &Dataset, audit: &mut AuditLog) -> Result<LearnOutcome> {
        if private.is_empty() {
            return Err(Error::Empty("private dataset"));
        }
        if private.dim() != self.candidates.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.candidates.dim(),
                got: private.dim(),
            });
        }
        audit.record(
            Stage::ReadPrivate,
            format!("{} private samples", private.len()),
        );
        let selection =
            self.tournament
                .select(private, self.cfg.epsilon, self.seed.derive(1), audit)?;
        Ok(LearnOutcome {
            distribution: self.candidates.hypotheses()[selection.chosen].clone(),
            selection,
            candidates: self.candidates.len(),
            scheme: self.scheme,
        })
    }
}

/// Candidates from public data, then ε-DP selection on private data.
pub fn pp_learn(
    public: &Dataset,
    private: &Dataset,
    cfg: &LearnerConfig,
    seed: RngSeed,
    audit: &mut AuditLog,
) -> Result<LearnOutcome> {
    Learner::prepare(public, cfg, seed, audit)?.select(private, audit)
}

/// The shifted, agnostic variant: public data may come from a source within
/// `cfg.shift` of the private one, and the private source need not lie in
/// the class. Uses the robust anchor (and its wider default grid) whatever
/// `cfg.anchor` says; the guarantee is TV ≤ (2/r)·OPT + α.
pub fn pp_learn_agnostic_shifted(
    public: &Dataset,
    private: &Dataset,
    cfg: &LearnerConfig,
    seed: RngSeed,
    audit: &mut AuditLog,
) -> Result<LearnOutcome> {
    let cfg = cfg.clone().robust(cfg.shift);
    cfg.validate()?;
    pp_learn(public, private, &cfg, seed, audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::GridSpec;
    use crate::distributions::{tv_distance, DataRole, GaussianParams};

    fn normal(mu: f64, var: f64) -> Distribution {
        GaussianParams::univariate(mu, var).unwrap().into()
    }

    #[test]
    fn trivial_grid_ignores_private_data() {
        let grid = GridSpec {
            mu_range: 0.0,
            mu_step: 1.0,
            sigma_range: (0.0, 0.0),
            sigma_step: 1.0,
        };
        let cfg = LearnerConfig::gaussian(0.2, 1.0).unwrap().with_grid(grid);
        let public = normal(5.0, 1.0).sample(16, RngSeed(1)).unwrap();
        let private = normal(-100.0, 1.0)
            .sample(50, RngSeed(2))
            .unwrap()
            .with_role(DataRole::Private);
        let out = pp_learn(&public, &private, &cfg, RngSeed(3), &mut AuditLog::new()).unwrap();
        assert_eq!(out.candidates, 1);
        assert_eq!(out.selection.probabilities, vec![1.0]);
    }

    #[test]
    fn audit_orders_public_before_private() {
        let cfg = LearnerConfig::gaussian(0.5, 1.0).unwrap();
        let truth = normal(37.0, 2.5);
        let public = truth.sample(32, RngSeed(1)).unwrap();
        let private = truth.sample(500, RngSeed(2)).unwrap();
        let mut log = AuditLog::new();
        let out = pp_learn(&public, &private, &cfg, RngSeed(3), &mut log).unwrap();
        assert!(log.private_after_public());
        let tv = tv_distance(&out.distribution, &truth, 1000, RngSeed(0)).unwrap();
        assert!(tv.value < 0.3, "{tv:?}");
    }

    #[test]
    fn product_family_needs_divisible_dimension() {
        let cfg = LearnerConfig::gaussian(0.5, 1.0)
            .unwrap()
            .with_family(Family::Product { k: 2 });
        let g = GaussianParams::standard(3).unwrap();
        let public = Distribution::from(g).sample(20, RngSeed(1)).unwrap();
        assert!(generate_candidates(&public, &cfg).is_err());
    }

    #[test]
    fn shifted_variant_uses_robust_anchor() {
        let cfg = LearnerConfig::gaussian(0.5, 1.0).unwrap();
        let public = normal(0.2, 1.0).sample(32, RngSeed(1)).unwrap();
        let private = normal(0.0, 1.0).sample(300, RngSeed(2)).unwrap();
        let out =
            pp_learn_agnostic_shifted(&public, &private, &cfg, RngSeed(3), &mut AuditLog::new())
                .unwrap();
        assert_eq!(out.scheme.decoder, DecoderId::RobustGaussianGrid);
        assert!((out.scheme.robustness - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let cfg = LearnerConfig::gaussian(0.5, 1.0).unwrap();
        let truth = normal(-3.0, 0.5);
        let public = truth.sample(16, RngSeed(1)).unwrap();
        let private = truth.sample(200, RngSeed(2)).unwrap();
        let a = pp_learn(&public, &private, &cfg, RngSeed(9), &mut AuditLog::new()).unwrap();
        let b = pp_learn(&public, &private, &cfg, RngSeed(9), &mut AuditLog::new()).unwrap();
        assert_eq!(a, b);
    }
}
