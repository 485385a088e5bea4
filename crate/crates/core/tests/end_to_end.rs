use proptest::prelude::*;

use ppdl_core::distributions::{tv_distance, tv_exact_gaussian_1d};
use ppdl_core::lowerbound::{nfl_report, NflBudgets};
use ppdl_core::pipeline::{pp_learn, run_experiment, ExperimentSpec, Family, Learner};
use ppdl_core::selection::mechanism_log_probabilities;
use ppdl_core::yatracos::{yatracos_learn, DbSize};
use ppdl_core::{
    AuditLog, DataRole, Distribution, FiniteDist, GaussianParams, LearnerConfig, MixtureParams,
    PrivacyBudget, RngSeed,
};

fn normal(mu: f64, var: f64) -> Distribution {
    GaussianParams::univariate(mu, var).unwrap().into()
}

#[test]
fn far_away_gaussian_is_learned_from_public_anchoring() {
    let truth = normal(5_000.0, 3.0);
    let public = truth.sample(32, RngSeed(1)).unwrap();
    let private = truth
        .sample(3000, RngSeed(2))
        .unwrap()
        .with_role(DataRole::Private);
    let cfg = LearnerConfig::gaussian(0.3, 1.0).unwrap();
    let mut audit = AuditLog::new();
    let out = pp_learn(&public, &private, &cfg, RngSeed(3), &mut audit).unwrap();
    assert!(audit.private_after_public());
    let (p, q) = (
        out.distribution.as_gaussian().unwrap(),
        truth.as_gaussian().unwrap(),
    );
    assert!(tv_exact_gaussian_1d(p, q).unwrap() <= 0.3);
}

#[test]
fn mixture_pipeline_recovers_two_components() {
    let truth: Distribution =
        MixtureParams::new(vec![normal(-6.0, 1.0), normal(4.0, 0.5)], vec![0.4, 0.6])
            .unwrap()
            .into();
    let public = truth.sample(48, RngSeed(4)).unwrap();
    let private = truth
        .sample(4000, RngSeed(5))
        .unwrap()
        .with_role(DataRole::Private);
    let cfg = LearnerConfig::gaussian(0.3, 1.0)
        .unwrap()
        .with_family(Family::Mixture {
            k: 2,
            weight_step: 0.2,
        });
    let out = pp_learn(&public, &private, &cfg, RngSeed(6), &mut AuditLog::new()).unwrap();
    let tv = tv_distance(&out.distribution, &truth, 0, RngSeed(0)).unwrap();
    assert!(tv.value <= 0.3, "{tv:?}");
}

#[test]
fn neighbouring_private_sets_respect_the_privacy_ratio() {
    // candidates are fixed by the public data, so selection probabilities are
    // the whole output distribution
    let public = normal(0.0, 1.0).sample(20, RngSeed(7)).unwrap();
    let cfg = LearnerConfig::gaussian(0.5, 0.7).unwrap();
    let learner = Learner::prepare(&public, &cfg, RngSeed(8), &mut AuditLog::new()).unwrap();
    let a = normal(0.3, 1.0)
        .sample(30, RngSeed(9))
        .unwrap()
        .with_role(DataRole::Private);
    let b = a.replace(4, &[250.0]).unwrap();
    let pa = learner.select(&a, &mut AuditLog::new()).unwrap();
    let pb = learner.select(&b, &mut AuditLog::new()).unwrap();
    for (x, y) in pa
        .selection
        .log_probabilities
        .iter()
        .zip(&pb.selection.log_probabilities)
    {
        assert!((x - y).abs() <= 0.7 + 1e-12);
    }
}

#[test]
fn experiment_reports_are_reproducible() {
    let spec = ExperimentSpec::gaussian(16, 200, 1.0, 3, 0.5);
    let a = run_experiment(&spec, RngSeed(10)).unwrap();
    let b = run_experiment(&spec, RngSeed(10)).unwrap();
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_ne!(run_experiment(&spec, RngSeed(11)).unwrap().rows, a.rows);
}

#[test]
fn yatracos_learner_finds_a_well_separated_truth() {
    let q = vec![
        FiniteDist::new(vec![0.4, 0.4, 0.1, 0.1]).unwrap(),
        FiniteDist::new(vec![0.1, 0.1, 0.4, 0.4]).unwrap(),
        FiniteDist::new(vec![0.4, 0.1, 0.4, 0.1]).unwrap(),
    ];
    let mut rng = RngSeed(12).rng();
    let public = q[2].sample_indices(40, &mut rng);
    let private = q[2].sample_indices(2000, &mut rng);
    let mut audit = AuditLog::new();
    let out = yatracos_learn(
        &q,
        &public,
        &private,
        PrivacyBudget::new(1.0).unwrap(),
        0.1,
        DbSize::Fixed(12),
        RngSeed(13),
        &mut audit,
    )
    .unwrap();
    assert_eq!(out.chosen, 2);
    assert!(audit.private_after_public());
}

#[test]
fn small_lower_bound_report_is_well_formed() {
    let budgets = NflBudgets {
        eta_trials: 5000,
        rk_outer: 2,
        rk_inner: 5000,
        sk_x: 2,
        sk_q: 1000,
    };
    let r = nfl_report(2, &[20, 10, 20], budgets, Some(1), RngSeed(14)).unwrap();
    let ks: Vec<u32> = r.rows.iter().map(|row| row.k).collect();
    assert_eq!(ks, [10, 20]);
    assert!(r
        .rows
        .iter()
        .all(|row| row.u_k > 0.0 && row.c > 0.0 && row.c < 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Utilities with sensitivity 1/n give log-probability gaps of at most ε.
    #[test]
    fn mechanism_is_epsilon_dp(
        base in prop::collection::vec(-1.0f64..0.0, 2..30),
        shifts in prop::collection::vec(-1.0f64..=1.0, 30),
        n in 1usize..200,
        eps in 0.01f64..20.0,
    ) {
        let moved: Vec<f64> = base.iter().zip(&shifts).map(|(u, s)| u + s / n as f64).collect();
        let budget = PrivacyBudget::new(eps).unwrap();
        let a = mechanism_log_probabilities(&base, n, budget).unwrap();
        let b = mechanism_log_probabilities(&moved, n, budget).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= eps + 1e-9);
        }
        let total: f64 = a.iter().map(|l| l.exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    /// TV between two normals is symmetric, in [0, 1], and zero on the diagonal.
    #[test]
    fn exact_tv_is_a_metric_on_normals(m1 in -20.0f64..20.0, v1 in 0.01f64..50.0, m2 in -20.0f64..20.0, v2 in 0.01f64..50.0) {
        let p = GaussianParams::univariate(m1, v1).unwrap();
        let q = GaussianParams::univariate(m2, v2).unwrap();
        let pq = tv_exact_gaussian_1d(&p, &q).unwrap();
        let qp = tv_exact_gaussian_1d(&q, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert_eq!(tv_exact_gaussian_1d(&p, &p).unwrap(), 0.0);
    }
}
