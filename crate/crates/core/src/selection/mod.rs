//! Pure-DP hypothesis selection: a Scheffé tournament scored by the
//! exponential mechanism.
//!
//! Selection runs in two phases. [`Tournament::prepare`] computes every
//! candidate-side quantity from the candidates alone; only then does
//! [`Tournament::select`] read private data, and it touches it only through
//! the empirical Scheffé masses, whose entries move by at most 1/n when
//! one sample changes.

mod mechanism;
mod scheffe;

pub use mechanism::{
    exponential_mechanism, mechanism_log_probabilities, PrivacyBudget, SelectionResult,
};
pub(crate) use scheffe::finite_set;
pub use scheffe::{
    utilities, ScheffeEngine, ScheffeTable, SquareMatrix, Tournament, MAX_TOURNAMENT_CANDIDATES,
    MIN_SCHEFFE_TRIALS,
};

use crate::audit::{AuditLog, Stage};
use crate::compression::CandidateSet;
use crate::distributions::{Dataset, Distribution};
use crate::error::Result;
use crate::rng::RngSeed;

impl Tournament {
    /// Utilities of every candidate against `private`.
    pub fn utilities(&self, private: &Dataset) -> Result<Vec<f64>> {
        utilities(self.candidate_mass(), &self.empirical_mass(private)?)
    }

    /// Runs the mechanism on `private`.
    pub fn select(
        &self,
        private: &Dataset,
        budget: PrivacyBudget,
        seed: RngSeed,
        audit: &mut AuditLog,
    ) -> Result<SelectionResult> {
        let emp = self.empirical_mass(private)?;
        audit.record(Stage::EmpiricalMass, format!("{} samples", private.len()));
        let u = utilities(self.candidate_mass(), &emp)?;
        audit.record(Stage::Utilities, format!("{} utilities", u.len()));
        let r = exponential_mechanism(&u, private.len(), budget, seed)?;
        audit.record(Stage::Mechanism, format!("chose {}", r.chosen));
        Ok(r)
    }
}

/// Candidate masses, then empirical masses, utilities, and the mechanism.
/// `seed` drives both the candidate-side Monte Carlo (when needed) and the
/// mechanism draw, on separate streams.
pub fn dp_select(
    candidates: &CandidateSet,
    private: &Dataset,
    budget: PrivacyBudget,
    mc_trials: usize,
    seed: RngSeed,
    audit: &mut AuditLog,
) -> Result<(Distribution, SelectionResult)> {
    let t = Tournament::prepare(candidates, mc_trials, seed.derive(0))?;
    audit.record(
        Stage::CandidateMass,
        format!("{:?} engine, {} candidates", t.engine(), t.len()),
    );
    let r = t.select(private, budget, seed.derive(1), audit)?;
    Ok((candidates.hypotheses()[r.chosen].clone(), r))
}
