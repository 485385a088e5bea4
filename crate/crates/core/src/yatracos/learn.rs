//! Minimum-distance selection against private query estimates, and the
//! end-to-end finite-domain public-private learner.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::class::{yatracos_class, HypothesisSet};
use super::cover::{public_cover, representative_domain};
use super::finite::FiniteDist;
use super::smalldb::{smalldb, DbSize, SmallDbResult};
use crate::audit::{AuditLog, Stage};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::selection::PrivacyBudget;

/// argmin_q max_h |q(h) − ĝ(f(h))|, smallest index on ties.
pub fn minimum_distance_select(
    q: &[FiniteDist],
    g_hat: &[f64],
    f: &[usize],
    h: &HypothesisSet,
) -> Result<usize> {
    if q.is_empty() {
        return Err(Error::Empty("Q"));
    }
    if f.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: f.len(),
        });
    }
    if let Some(&i) = f.iter().find(|&&i| i >= g_hat.len()) {
        return Err(Error::invalid(
            "f",
            format!("maps to {i}, but only {} estimates", g_hat.len()),
        ));
    }
    let mut best = (0, f64::INFINITY);
    for (i, p) in q.iter().enumerate() {
        let dev = h
            .masks()
            .iter()
            .zip(f)
            .map(|(&m, &j)| (p.mass_of(m) - g_hat[j]).abs())
            .fold(0.0, f64::max);
        if dev < best.1 {
            best = (i, dev);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YatracosOutcome {
    pub chosen: usize,
    pub class_size: usize,
    pub cover_size: usize,
    pub reduced_domain: usize,
    pub smalldb: SmallDbResult,
}

/// Yatracos class of `q`, cover by `public`, representative domain, SmallDB
/// on `private`, and minimum-distance selection. Samples are domain
/// elements.
#[allow(clippy::too_many_arguments)]
pub fn yatracos_learn(
    q: &[FiniteDist],
    public: &[usize],
    private: &[usize],
    budget: PrivacyBudget,
    alpha: f64,
    db_size: DbSize,
    seed: RngSeed,
    audit: &mut AuditLog,
) -> Result<YatracosOutcome> {
    let h = yatracos_class(q)?;
    audit.record(
        Stage::ReadPublic,
        format!("{} public samples", public.len()),
    );
    let cover = public_cover(&h, public)?;
    audit.record(
        Stage::Cover,
        format!("{} of {} hypotheses kept", cover.reduced.len(), h.len()),
    );
    let rd = representative_domain(h.domain(), &cover.reduced);
    let k = db_size.resolve(cover.reduced.len(), alpha)?;
    if private.is_empty() {
        return Err(Error::Empty("private sample"));
    }
    if let Some(&x) = private.iter().find(|&&x| x >= h.domain()) {
        return Err(Error::invalid(
            "private",
            format!("{x} outside a domain of size {}", h.domain()),
        ));
    }
    audit.record(
        Stage::ReadPrivate,
        format!("{} private samples", private.len()),
    );
    let hist = rd.histogram(private);
    let masks: Vec<u64> = cover
        .reduced
        .masks()
        .iter()
        .map(|&m| rd.reduce_mask(m))
        .collect();
    let sdb = smalldb(&hist, &masks, budget, k, seed)?;
    audit.record(
        Stage::SmallDb,
        format!("{} databases of size {k}", sdb.databases),
    );
    let chosen = minimum_distance_select(q, &sdb.estimates, &cover.map, &h)?;
    audit.record(Stage::MinimumDistance, format!("chose {chosen}"));
    Ok(YatracosOutcome {
        chosen,
        class_size: h.len(),
        cover_size: cover.reduced.len(),
        reduced_domain: rd.len(),
        smalldb: sdb,
    })
}

/// Parameters of a repeated finite-domain experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YatracosDemo {
    pub classes: Vec<FiniteDist>,
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub db_size: DbSize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YatracosTrial {
    pub trial: usize,
    pub seed: u64,
    pub truth: usize,
    pub chosen: usize,
    pub tv_error: f64,
    pub success: bool,
    pub cover_size: usize,
    pub reduced_domain: usize,
    pub db_size: usize,
}

impl YatracosDemo {
    /// One trial: the truth is a uniformly drawn member of the class.
    pub fn run_trial(&self, trial: usize, master: RngSeed) -> Result<YatracosTrial> {
        let seed = master.derive(trial as u64);
        let mut rng = seed.derive(0).rng();
        let truth = rng.random_range(0..self.classes.len());
        let p = &self.classes[truth];
        let public = p.sample_indices(self.m, &mut seed.derive(1).rng());
        let private = p.sample_indices(self.n, &mut seed.derive(2).rng());
        let out = yatracos_learn(
            &self.classes,
            &public,
            &private,
            PrivacyBudget::new(self.epsilon)?,
            self.alpha,
            self.db_size,
            seed.derive(3),
            &mut AuditLog::new(),
        )?;
        let tv = self.classes[out.chosen].tv(p);
        Ok(YatracosTrial {
            trial,
            seed: seed.0,
            truth,
            chosen: out.chosen,
            tv_error: tv,
            success: tv <= self.alpha,
            cover_size: out.cover_size,
            reduced_domain: out.reduced_domain,
            db_size: out.smalldb.db_size,
        })
    }

    pub fn run(&self, master: RngSeed) -> Result<Vec<YatracosTrial>> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        (0..self.trials)
            .map(|t| self.run_trial(t, master))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(m: &[f64]) -> FiniteDist {
        FiniteDist::new(m.to_vec()).unwrap()
    }

    #[test]
    fn hand_example() {
        let q = [fd(&[0.7, 0.3]), fd(&[0.3, 0.7])];
        let h = HypothesisSet::new(2, vec![0b01]).unwrap();
        assert_eq!(minimum_distance_select(&q, &[0.6], &[0], &h).unwrap(), 0);
    }

    #[test]
    fn exact_estimates_recover_truth() {
        let q = [
            fd(&[0.5, 0.25, 0.25]),
            fd(&[0.2, 0.2, 0.6]),
            fd(&[0.1, 0.8, 0.1]),
        ];
        let h = yatracos_class(&q).unwrap();
        let g: Vec<f64> = h.masks().iter().map(|&m| q[1].mass_of(m)).collect();
        let f: Vec<usize> = (0..h.len()).collect();
        assert_eq!(minimum_distance_select(&q, &g, &f, &h).unwrap(), 1);
    }

    #[test]
    fn end_to_end_small() {
        let q = vec![
            fd(&[0.4, 0.4, 0.1, 0.1]),
            fd(&[0.1, 0.1, 0.4, 0.4]),
            fd(&[0.1, 0.4, 0.4, 0.1]),
        ];
        let demo = YatracosDemo {
            classes: q,
            m: 20,
            n: 1000,
            epsilon: 1.0,
            alpha: 0.1,
            db_size: DbSize::Fixed(10),
            trials: 20,
        };
        let rows = demo.run(RngSeed(5)).unwrap();
        assert!(rows.iter().filter(|r| r.success).count() >= 18);
        assert_eq!(rows, demo.run(RngSeed(5)).unwrap());
    }

    #[test]
    fn audit_records_private_last() {
        let q = [fd(&[0.7, 0.3]), fd(&[0.3, 0.7])];
        let mut log = AuditLog::new();
        yatracos_learn(
            &q,
            &[0, 1],
            &[0, 0, 1],
            PrivacyBudget::new(1.0).unwrap(),
            0.5,
            DbSize::Fixed(2),
            RngSeed(0),
            &mut log,
        )
        .unwrap();
        assert!(log.private_after_public());
        assert_eq!(log.events().last().unwrap().stage, Stage::MinimumDistance);
    }
}
