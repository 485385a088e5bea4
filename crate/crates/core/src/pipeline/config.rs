use serde::{Deserialize, Serialize};

use crate::compression::{Anchor, GridSpec, MixtureGrid, DEFAULT_CANDIDATE_CAP};
use crate::error::{Error, Result};
use crate::selection::{PrivacyBudget, MIN_SCHEFFE_TRIALS};

/// Hypothesis family the public data is compressed into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    /// k-component Gaussian mixtures.
    Mixture {
        k: usize,
        #[serde(default = "default_weight_step")]
        weight_step: f64,
    },
    /// Products of k Gaussians over equal coordinate blocks.
    Product {
        k: usize,
    },
}

fn default_weight_step() -> f64 {
    0.1
}

impl Family {
    /// Components or factors; 1 for a single Gaussian.
    pub fn k(&self) -> usize {
        match *self {
            Family::Gaussian => 1,
            Family::Mixture { k, .. } | Family::Product { k } => k,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Mixture { .. } => "mixture",
            Family::Product { .. } => "product",
        }
    }
}

/// Everything a public-private learner needs besides data and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub epsilon: PrivacyBudget,
    #[serde(default = "default_family")]
    pub family: Family,
    /// Overrides the grid derived from `alpha`.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub anchor: Anchor,
    /// TV distance between the public and private sources the caller is
    /// prepared to tolerate; nonzero requires a robust anchor.
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_cap")]
    pub candidate_cap: usize,
    /// Monte Carlo draws per candidate for Scheffé masses without a closed form.
    #[serde(default = "default_mc_trials")]
    pub mc_trials: usize,
}

fn default_beta() -> f64 {
    0.1
}

fn default_family() -> Family {
    Family::Gaussian
}

fn default_cap() -> usize {
    DEFAULT_CANDIDATE_CAP
}

fn default_mc_trials() -> usize {
    4 * MIN_SCHEFFE_TRIALS
}

impl LearnerConfig {
    /// Realizable Gaussian learner with default grid and caps.
    pub fn gaussian(alpha: f64, epsilon: f64) -> Result<Self> {
        let cfg = LearnerConfig {
            alpha,
            beta: default_beta(),
            epsilon: PrivacyBudget::new(epsilon)?,
            family: Family::Gaussian,
            grid: None,
            anchor: Anchor::Empirical,
            shift: 0.0,
            candidate_cap: default_cap(),
            mc_trials: default_mc_trials(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_anchor(mut self, anchor: Anchor) -> Self {
        self.anchor = anchor;
        self
    }

    /// Robust anchor and grid, tolerating public data from a source within
    /// `shift` of the private one.
    pub fn robust(mut self, shift: f64) -> Self {
        self.anchor = Anchor::Robust;
        self.shift = shift;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha", "must be in (0, 1]"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta", "must be in (0, 1]"));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::invalid("shift", "must be nonnegative"));
        }
        if self.shift > self.robustness() / 2.0 {
            return Err(Error::invalid(
                "shift",
                format!(
                    "must be at most r/2 = {} for this anchor",
                    self.robustness() / 2.0
                ),
            ));
        }
        if self.family.k() == 0 {
            return Err(Error::invalid("family.k", "must be at least 1"));
        }
        if let Family::Mixture { weight_step, .. } = self.family {
            if !(weight_step > 0.0 && weight_step <= 1.0) {
                return Err(Error::invalid("family.weight_step", "must be in (0, 1]"));
            }
        }
        if self.candidate_cap == 0 {
            return Err(Error::invalid("candidate_cap", "must be positive"));
        }
        if self.mc_trials < MIN_SCHEFFE_TRIALS {
            return Err(Error::invalid(
                "mc_trials",
                format!("must be at least {MIN_SCHEFFE_TRIALS}"),
            ));
        }
        self.effective_grid().validate()
    }

    /// Fraction of corrupted public samples the compression tolerates.
    pub fn robustness(&self) -> f64 {
        self.anchor.robustness()
    }

    /// Agnostic factor 2/r of the shifted guarantee; `None` when not robust.
    pub fn agnostic_factor(&self) -> Option<f64> {
        let r = self.robustness();
        (r > 0.0).then(|| 2.0 / r)
    }

    /// The explicit grid, or the default for `alpha` and the anchor.
    pub fn effective_grid(&self) -> GridSpec {
        self.grid
            .unwrap_or_else(|| match (&self.family, &self.anchor) {
                (Family::Mixture { k, .. }, _) => {
                    MixtureGrid::for_accuracy(*k, self.alpha).component_grid
                }
                (_, Anchor::Robust) => GridSpec::robust_for_accuracy(self.alpha),
                _ => GridSpec::for_accuracy(self.alpha),
            })
    }
}
