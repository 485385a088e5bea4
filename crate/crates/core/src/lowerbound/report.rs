//! The no-free-lunch table: one row of estimates per k.

use serde::{Deserialize, Serialize};

use super::estimate::{estimate_eta, estimate_rk, estimate_sk, Estimate};
use super::flat::{c_value, check_dim, u_k_value};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Monte Carlo budgets for [`nfl_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NflBudgets {
    pub eta_trials: usize,
    pub rk_outer: usize,
    pub rk_inner: usize,
    pub sk_x: usize,
    pub sk_q: usize,
}

impl Default for NflBudgets {
    fn default() -> Self {
        NflBudgets {
            eta_trials: 100_000,
            rk_outer: 16,
            rk_inner: 100_000,
            sk_x: 32,
            sk_q: 20_000,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NflRow {
    pub k: u32,
    pub eta_hat: f64,
    pub eta_ci: f64,
    pub u_k: f64,
    pub c: f64,
    pub rk_hat: f64,
    pub rk_ci: f64,
    pub sk_hat: f64,
    pub sk_ci: f64,
    pub ratio: f64,
    /// Ratio strictly below the previous row's (true on the first row).
    pub decay_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NflReport {
    pub d: usize,
    pub rows: Vec<NflRow>,
    /// r̂_k/ŝ_k strictly decreasing over the rows.
    pub decay: bool,
    /// Every pair of η̂ intervals overlaps.
    pub eta_stable: bool,
    /// First k whose ratio is at most 1/(11ℓ), when ℓ was supplied.
    pub crossing_k: Option<u32>,
}

impl NflRow {
    pub fn eta(&self) -> Estimate {
        Estimate {
            value: self.eta_hat,
            half_width: self.eta_ci,
        }
    }
}

impl NflReport {
    /// Least-squares slope of log r̂_k against log k.
    pub fn rk_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.rk_hat > 0.0)
            .map(|r| ((r.k as f64).ln(), r.rk_hat.ln()))
            .collect();
        log_log_slope(&pts)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::invalid("csv", e.to_string()))?;
        }
        w.flush()
            .map_err(|e| Error::invalid("csv", e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Estimates η, u_k, c, r_k and s_k for every k (sorted ascending,
/// deduplicated). The same seed is used for every k so the estimates share
/// random numbers.
pub fn nfl_report(
    d: usize,
    ks: &[u32],
    budgets: NflBudgets,
    list_size: Option<u64>,
    seed: RngSeed,
) -> Result<NflReport> {
    check_dim(d)?;
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::Empty("k list"));
    }
    if ks.len() == 1 {
        log::warn!("a single k makes the decay and stability flags vacuous");
    }
    let mut rows: Vec<NflRow> = Vec::with_capacity(ks.len());
    for &k in &ks {
        let eta = estimate_eta(k, d, budgets.eta_trials, seed.derive(0))?;
        let rk = estimate_rk(k, d, budgets.rk_outer, budgets.rk_inner, seed.derive(1))?;
        let sk = estimate_sk(k, d, budgets.sk_x, budgets.sk_q, seed.derive(2))?;
        let ratio = if sk.value > 0.0 {
            rk.value / sk.value
        } else {
            f64::INFINITY
        };
        let decay_flag = rows.last().is_none_or(|prev| ratio < prev.ratio);
        log::info!(
            "k={k}: eta={:.4} rk={:.3e} sk={:.3e}",
            eta.value,
            rk.value,
            sk.value
        );
        rows.push(NflRow {
            k,
            eta_hat: eta.value,
            eta_ci: eta.half_width,
            u_k: u_k_value(k, d),
            c: c_value(d),
            rk_hat: rk.value,
            rk_ci: rk.half_width,
            sk_hat: sk.value,
            sk_ci: sk.half_width,
            ratio,
            decay_flag,
        });
    }
    let decay = rows.iter().all(|r| r.decay_flag);
    let eta_stable = rows
        .iter()
        .enumerate()
        .all(|(i, a)| rows[i + 1..].iter().all(|b| a.eta().overlaps(&b.eta())));
    let crossing_k = list_size.and_then(|l| {
        let bound = 1.0 / (11.0 * l as f64);
        rows.iter().find(|r| r.ratio <= bound).map(|r| r.k)
    });
    Ok(NflReport {
        d,
        rows,
        decay,
        eta_stable,
        crossing_k,
    })
}
