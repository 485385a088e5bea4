use std::path::Path;
use std::process::{Command, Output};

use ppdl_core::pipeline::{suggest_n, SuggestRequest};
use ppdl_core::{Distribution, GaussianParams, RngSeed};

fn ppdl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppdl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run ppdl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A temp dir holding a learner config and public/private samples.
fn learn_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let truth: Distribution = GaussianParams::univariate(-40.0, 0.5).unwrap().into();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"alpha": 0.3, "epsilon": 1.0}"#,
    )
    .unwrap();
    let public = serde_json::to_string(&truth.sample(24, RngSeed(1)).unwrap()).unwrap();
    let private = serde_json::to_string(&truth.sample(400, RngSeed(2)).unwrap()).unwrap();
    std::fs::write(dir.path().join("pub.json"), public).unwrap();
    std::fs::write(dir.path().join("priv.json"), private).unwrap();
    dir
}

#[test]
fn tv_of_a_distribution_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppdl(
        &[
            "tv",
            "--p",
            r#"{"kind":"gaussian","mean":[0],"covariance":[[1]]}"#,
            "--q",
            "same",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn exact_tv_needs_no_seed_but_monte_carlo_does() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = r#"{"kind":"gaussian","mean":[0],"covariance":[[1]]}"#;
    let q1 = r#"{"kind":"gaussian","mean":[1],"covariance":[[1]]}"#;
    let o = ppdl(&["tv", "--p", p1, "--q", q1], dir.path());
    assert!(o.status.success());
    // 2Φ(1/2) − 1
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.382_924_922_548_026).abs() < 1e-12, "{v}");

    let p2 = r#"{"kind":"gaussian","mean":[0,0],"covariance":[[1,0],[0,1]]}"#;
    let o = ppdl(&["tv", "--p", p2, "--q", "same"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = ppdl(
        &[
            "tv", "--p", p2, "--q", "same", "--seed", "3", "--trials", "1000",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn stochastic_subcommands_require_a_seed() {
    let dir = learn_fixture();
    let d = dir.path();
    std::fs::write(
        d.join("spec.json"),
        r#"{"m":[8],"n":[50],"epsilon":[1],"trials":1,"alpha":0.5}"#,
    )
    .unwrap();
    std::fs::write(
        d.join("q.json"),
        r#"[{"masses":[0.5,0.5]},{"masses":[0.9,0.1]}]"#,
    )
    .unwrap();
    let cases: [&[&str]; 4] = [
        &[
            "learn",
            "--config",
            "cfg.json",
            "--public",
            "pub.json",
            "--private",
            "priv.json",
        ],
        &["experiment", "--spec", "spec.json"],
        &["lowerbound", "--k", "10"],
        &[
            "yatracos-demo",
            "--domain",
            "2",
            "--classes",
            "q.json",
            "--m",
            "5",
            "--n",
            "5",
            "--epsilon",
            "1",
            "--alpha",
            "0.1",
            "--trials",
            "1",
        ],
    ];
    for args in cases {
        let o = ppdl(args, d);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("--seed"), "{}", stderr(&o));
    }
}

#[test]
fn learn_reports_audit_in_order() {
    let dir = learn_fixture();
    let o = ppdl(
        &[
            "learn",
            "--config",
            "cfg.json",
            "--public",
            "pub.json",
            "--private",
            "priv.json",
            "--seed",
            "7",
            "--audit",
            "--out",
            "res.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let res: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("res.json")).unwrap()).unwrap();
    let stages: Vec<&str> = res["audit"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["stage"].as_str().unwrap())
        .collect();
    assert_eq!(
        stages,
        [
            "read_public",
            "candidate_generation",
            "candidate_mass",
            "read_private",
            "empirical_mass",
            "utilities",
            "mechanism"
        ]
    );
    let p = &res["selection"]["probabilities"];
    let total: f64 = p
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(res["distribution"]["kind"], "gaussian");
}

#[test]
fn public_errors_surface_before_the_private_file_is_opened() {
    let dir = learn_fixture();
    std::fs::write(
        dir.path().join("bad_pub.json"),
        r#"{"points": [[1.0], [1.0], [1.0]]}"#,
    )
    .unwrap();
    // the private path does not exist; the public failure must win
    let o = ppdl(
        &[
            "learn",
            "--config",
            "cfg.json",
            "--public",
            "bad_pub.json",
            "--private",
            "missing.json",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!stderr(&o).contains("missing.json"));

    let o = ppdl(
        &[
            "learn",
            "--config",
            "cfg.json",
            "--public",
            "pub.json",
            "--private",
            "missing.json",
            "--seed",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = learn_fixture();
    let d = dir.path();
    std::fs::write(
        d.join("typo.json"),
        r#"{"alpha": 0.3, "epsilon": 1.0, "alhpa": 2}"#,
    )
    .unwrap();
    std::fs::write(d.join("neg.json"), r#"{"alpha": 0.3, "epsilon": -1.0}"#).unwrap();
    for cfg in ["typo.json", "neg.json", "nonexistent.json"] {
        let o = ppdl(
            &[
                "learn",
                "--config",
                cfg,
                "--public",
                "pub.json",
                "--private",
                "priv.json",
                "--seed",
                "1",
            ],
            d,
        );
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", stderr(&o));
    }
    // unwritable output location
    let o = ppdl(
        &[
            "learn",
            "--config",
            "cfg.json",
            "--public",
            "pub.json",
            "--private",
            "priv.json",
            "--seed",
            "1",
            "--out",
            "no/such/dir/res.json",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(2));
    // unknown flag is a usage error
    assert_eq!(ppdl(&["suggest-n", "--bogus"], d).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ppdl"))
        .args([
            "suggest-n",
            "--alpha",
            "0.1",
            "--epsilon",
            "1",
            "--tau",
            "3",
            "--bits",
            "4",
        ])
        .env("PPDL_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suggest_n_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = ppdl(
        &[
            "suggest-n",
            "--alpha",
            "0.1",
            "--beta",
            "0.1",
            "--epsilon",
            "1",
            "--tau",
            "32",
            "--bits",
            "40",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let expect = suggest_n(&SuggestRequest::new(0.1, 0.1, 1.0, 32, 40))
        .unwrap()
        .n;
    let first: u64 = stdout(&o)
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(first, expect);
    assert!(stdout(&o).contains("C = 1"));
}

#[test]
fn reports_have_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("spec.json"),
        r#"{"m":[8],"n":[50],"epsilon":[1],"trials":2,"alpha":0.5}"#,
    )
    .unwrap();
    let o = ppdl(
        &[
            "experiment",
            "--spec",
            "spec.json",
            "--seed",
            "1",
            "--out",
            "r.csv",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "family,d,k,m,n,epsilon,trial,seed,tv_error,tv_ci,candidates,success"
    );
    assert_eq!(csv.lines().count(), 3);

    std::fs::write(
        d.join("b.json"),
        r#"{"eta_trials": 2000, "rk_outer": 1, "rk_inner": 1000, "sk_x": 1, "sk_q": 200}"#,
    )
    .unwrap();
    let o = ppdl(
        &[
            "lowerbound",
            "--k",
            "10,20",
            "--config",
            "b.json",
            "--seed",
            "1",
            "--out",
            "nfl.csv",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("nfl.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "k,eta_hat,eta_ci,u_k,c,rk_hat,rk_ci,sk_hat,sk_ci,ratio,decay_flag"
    );
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn yatracos_demo_rejects_mismatched_domain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("q.json"),
        r#"[{"masses":[0.5,0.5]},{"masses":[0.9,0.1]}]"#,
    )
    .unwrap();
    let args = [
        "yatracos-demo",
        "--domain",
        "3",
        "--classes",
        "q.json",
        "--m",
        "5",
        "--n",
        "50",
        "--epsilon",
        "1",
        "--alpha",
        "0.2",
        "--trials",
        "2",
        "--seed",
        "4",
    ];
    assert_eq!(ppdl(&args, d).status.code(), Some(2));
    let mut ok = args;
    ok[2] = "2";
    let o = ppdl(&ok, d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
}
