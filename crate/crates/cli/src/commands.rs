//! One handler per subcommand.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use ppdl_core::distributions::tv_distance;
use ppdl_core::lowerbound::{nfl_report, NflBudgets};
use ppdl_core::pipeline::{run_experiment, suggest_n, ExperimentSpec, Learner, SuggestRequest};
use ppdl_core::yatracos::{DbSize, YatracosDemo};
use ppdl_core::{
    AuditLog, DataRole, Dataset, Distribution, FiniteDist, LearnOutcome, LearnerConfig, RngSeed,
};

use crate::io::{emit, json_arg, read_json, to_json, CliError};

fn require_seed(seed: Option<u64>, cmd: &str) -> Result<RngSeed, CliError> {
    seed.map(RngSeed).ok_or_else(|| {
        CliError::config(format!(
            "`{cmd}` is randomized and needs an explicit --seed"
        ))
    })
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Learner configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Public samples (JSON dataset).
    #[arg(long)]
    pub public: PathBuf,
    /// Private samples (JSON dataset); read only after candidates are built.
    #[arg(long)]
    pub private: PathBuf,
    /// Seed for every random draw; required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Result JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include the call-sequence audit log in the result.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Serialize)]
struct LearnReport {
    #[serde(flatten)]
    outcome: LearnOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<AuditLog>,
}

pub fn learn(args: &LearnArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "learn")?;
    let cfg: LearnerConfig = read_json(&args.config)?;
    cfg.validate()?;
    let public: Dataset = read_json(&args.public)?;
    let mut audit = AuditLog::new();
    let learner = Learner::prepare(&public, &cfg, seed, &mut audit)?;
    // the private file is opened only now, after all candidate-side work
    let private: Dataset = read_json::<Dataset>(&args.private)?.with_role(DataRole::Private);
    let outcome = learner.select(&private, &mut audit)?;
    debug_assert!(audit.private_after_public());
    let report = LearnReport {
        outcome,
        audit: args.audit.then_some(audit),
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment specification (JSON).
    #[arg(long, alias = "config")]
    pub spec: PathBuf,
    /// Seed for every random draw; required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "experiment")?;
    let spec: ExperimentSpec = read_json(&args.spec)?;
    let report = run_experiment(&spec, seed)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    for &m in &spec.m {
        for &n in &spec.n {
            for &eps in &spec.epsilon {
                log::info!(
                    "m={m} n={n} epsilon={eps}: success {:.3}, mean TV {:.4}",
                    report.success_rate(m, n, eps),
                    report.mean_error(m, n, eps)
                );
            }
        }
    }
    Ok(())
}

/// Accepts plain integers and float notation such as `1e5`.
fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(v as usize),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
    pub k: Vec<u32>,
    /// Monte Carlo budgets (JSON); the flags below override single fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_count)]
    pub trials_eta: Option<usize>,
    /// Inner draws per reference point for r_k.
    #[arg(long, value_parser = parse_count)]
    pub trials_rk: Option<usize>,
    /// Inner draws per point for s_k.
    #[arg(long, value_parser = parse_count)]
    pub trials_sk: Option<usize>,
    /// List size ℓ, for the k at which the ratio drops below 1/(11ℓ).
    #[arg(long)]
    pub list_size: Option<u64>,
    /// Seed for every random draw; required.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn lowerbound(args: &LowerboundArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "lowerbound")?;
    let mut budgets: NflBudgets = match &args.config {
        Some(p) => read_json(p)?,
        None => NflBudgets::default(),
    };
    if let Some(t) = args.trials_eta {
        budgets.eta_trials = t;
    }
    if let Some(t) = args.trials_rk {
        budgets.rk_inner = t;
    }
    if let Some(t) = args.trials_sk {
        budgets.sk_q = t;
    }
    let report = nfl_report(args.d, &args.k, budgets, args.list_size, seed)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(args.out.as_deref(), &buf)?;
    match report.rk_slope() {
        Some(s) => log::info!("r_k log-log slope {s:.3}"),
        None => log::info!("r_k slope needs two k values"),
    }
    log::info!(
        "ratio strictly decreasing: {}, eta stable: {}",
        report.decay,
        report.eta_stable
    );
    if let Some(k) = report.crossing_k {
        log::info!("ratio below 1/(11 l) from k = {k}");
    }
    Ok(())
}

fn parse_db_size(s: &str) -> Result<DbSize, String> {
    if s == "theory" {
        return Ok(DbSize::Theory);
    }
    s.parse::<usize>()
        .map(DbSize::Fixed)
        .map_err(|_| format!("`{s}` is neither `theory` nor a size"))
}

#[derive(Debug, Args)]
pub struct YatracosArgs {
    /// Domain size; every class member must have this many masses.
    #[arg(long)]
    pub domain: usize,
    /// The class: a JSON array of {"masses": [..]}.
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub trials: usize,
    /// SmallDB database size: a number, or `theory` for ⌈ln|Ĥ|/α²⌉.
    #[arg(long, value_parser = parse_db_size, default_value = "16")]
    pub db_size: DbSize,
    /// Seed for every random draw; required.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn yatracos_demo(args: &YatracosArgs) -> Result<(), CliError> {
    let seed = require_seed(args.seed, "yatracos-demo")?;
    let classes: Vec<FiniteDist> = read_json(&args.classes)?;
    if let Some(q) = classes.iter().find(|q| q.domain_size() != args.domain) {
        return Err(CliError::config(format!(
            "class member has domain {}, expected {}",
            q.domain_size(),
            args.domain
        )));
    }
    let demo = YatracosDemo {
        classes,
        m: args.m,
        n: args.n,
        epsilon: args.epsilon,
        alpha: args.alpha,
        db_size: args.db_size,
        trials: args.trials,
    };
    let trials = demo.run(seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in &trials {
        w.serialize(t)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let buf = w
        .into_inner()
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    emit(args.out.as_deref(), &buf)?;
    let hits = trials.iter().filter(|t| t.success).count();
    log::info!("success {hits}/{}", trials.len());
    Ok(())
}

#[derive(Debug, Args)]
pub struct TvArgs {
    /// First distribution: inline JSON or a JSON file.
    #[arg(long)]
    pub p: String,
    /// Second distribution, or `same` to reuse the first.
    #[arg(long)]
    pub q: String,
    /// Monte Carlo draws when no exact method applies.
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub trials: usize,
    /// Needed only when the estimate is Monte Carlo.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Full estimate as JSON; the value alone goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn has_exact_tv(p: &Distribution, q: &Distribution) -> bool {
    (p.as_univariate_gaussian().is_some() && q.as_univariate_gaussian().is_some())
        || (p.as_finite().is_some() && q.as_finite().is_some())
        || (p.as_normal_mixture_1d().is_some() && q.as_normal_mixture_1d().is_some())
}

pub fn tv(args: &TvArgs) -> Result<(), CliError> {
    let p: Distribution = json_arg(&args.p)?;
    let q: Distribution = if args.q == "same" {
        p.clone()
    } else {
        json_arg(&args.q)?
    };
    let seed = if has_exact_tv(&p, &q) {
        RngSeed(args.seed.unwrap_or(0))
    } else {
        require_seed(args.seed, "tv")?
    };
    let est = tv_distance(&p, &q, args.trials, seed)?;
    if est.half_width > 0.0 {
        println!("{} ± {}", est.value, est.half_width);
    } else {
        println!("{}", est.value);
    }
    if let Some(path) = &args.out {
        emit(Some(path), &to_json(&est)?)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SuggestArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long)]
    pub epsilon: f64,
    /// Samples kept by the compression scheme.
    #[arg(long)]
    pub tau: usize,
    /// Bits kept by the compression scheme.
    #[arg(long)]
    pub bits: usize,
    /// Public sample size; defaults to tau.
    #[arg(long)]
    pub m: Option<usize>,
    /// Leading constant C of the bound.
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    /// Share of beta spent on selection.
    #[arg(long, default_value_t = 0.5)]
    pub selection_share: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn suggest(args: &SuggestArgs) -> Result<(), CliError> {
    let req = SuggestRequest {
        m: args.m,
        constant: args.constant,
        selection_share: args.selection_share,
        ..SuggestRequest::new(args.alpha, args.beta, args.epsilon, args.tau, args.bits)
    };
    let s = suggest_n(&req)?;
    let line = format!(
        "{} (C = {}, selection share {})\n",
        s.n, s.constant, s.selection_share
    );
    emit(args.out.as_deref(), line.as_bytes())
}

/// Sizes the global rayon pool from `PPDL_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("PPDL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::config(format!(
            "PPDL_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(e.to_string()))
}
