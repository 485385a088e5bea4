//! Monte Carlo estimates of η, r_k and s_k.
//!
//! Every estimator draws its randomness from streams that do not depend on
//! `k`, so calling it with the same seed for several `k` uses common random
//! numbers and the trends across `k` are not swamped by sampling noise.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flat::{
    check_dim, dot, log_c, log_u_k, norm, sample_instance, uniform_ball, uniform_band_direction,
    CylinderSpec, FlatGaussianParams, DISK_RADIUS,
};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Trials per independently seeded chunk; fixed so that results do not
/// depend on the thread count.
const CHUNK: usize = 1024;

/// Separation threshold certified by either certificate.
pub const CERTIFIED_TV: f64 = 1.0 / 200.0;
/// Radius of the TV balls counted by r_k.
pub const BALL_RADIUS: f64 = 1.0 / 400.0;

/// Point estimate with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn binomial(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate {
            value: p,
            half_width: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.value + self.half_width
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }
}

fn check_trials(name: &str, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid(name, "must be positive"));
    }
    Ok(())
}

/// Counts trials satisfying `hit`, chunked over derived seeds.
fn count_hits<F>(trials: usize, seed: RngSeed, hit: F) -> usize
where
    F: Fn(&mut crate::rng::Rng) -> bool + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.derive(c as u64).rng();
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len).filter(|_| hit(&mut rng)).count()
        })
        .sum()
}

/// η̂ = P[X ∈ B] with Q ∼ 𝒰(Q_k) and X ∼ Q^{d−1}, B = C^{d−1}.
pub fn estimate_eta(k: u32, d: usize, trials: usize, seed: RngSeed) -> Result<Estimate> {
    check_dim(d)?;
    check_trials("trials", trials)?;
    if k < 10 {
        return Err(Error::invalid("k", "the bound on B holds for k ≥ 10"));
    }
    let cyl = CylinderSpec::new(d)?;
    let hits = count_hits(trials, seed, |rng| {
        let q = sample_instance(k, d, rng).expect("validated");
        let mut x = Vec::with_capacity(d);
        let mut all = true;
        // Always draw every point so the stream is the same for every k.
        for _ in 0..d - 1 {
            q.sample_into(rng, &mut x);
            all &= cyl.contains(&x).expect("dimension checked");
        }
        all
    });
    Ok(Estimate::binomial(hits, trials))
}

/// Unit direction r̂ of the first d−1 coordinates of `u`.
fn radial_direction(u: &[f64]) -> Vec<f64> {
    let r = &u[..u.len() - 1];
    let n = norm(r);
    r.iter().map(|x| x / n).collect()
}

/// Half-angle of the caps around ±u outside which the variance certificate fires.
pub fn angle_threshold(k: u32) -> f64 {
    2f64.sqrt() * PI / (2.0 * k as f64)
}

/// Whether the mean-shift certificate fails: |r̂·(t′−t)| < σ/20.
fn slab_fails(p: &FlatGaussianParams, r_hat: &[f64], t2: &[f64]) -> bool {
    let shift: f64 = r_hat
        .iter()
        .zip(t2.iter().zip(&p.t))
        .map(|(r, (a, b))| r * (a - b))
        .sum();
    shift.abs() < p.sigma() / 20.0
}

/// Whether the variance certificate fails: ∠(u, u′) within the caps.
fn cap_fails(p: &FlatGaussianParams, u2: &[f64]) -> bool {
    dot(&p.u, u2).abs() > angle_threshold(p.k).cos()
}

/// True when one of the two separation arguments proves
/// TV(p, q) ≥ 1/200: the thin-axis variances differ by a factor of at least
/// two, or the means projected on the thin axis differ by at least σ/40.
/// Both `p` and `q` must use the same `k`.
pub fn separation_certified(p: &FlatGaussianParams, q: &FlatGaussianParams) -> bool {
    let r_hat = radial_direction(&p.u);
    !(slab_fails(p, &r_hat, &q.t) && cap_fails(p, &q.u))
}

/// Mass of the uncertified region around one reference member `p`.
///
/// The uncertified event is {slab fails} ∩ {cap fails}, which depend on t′
/// and u′ respectively. They are independent under 𝒰(T × N), so the two
/// marginal frequencies are estimated separately and multiplied. At k = 80
/// the joint event has mass near 3e−5, which a joint count could not resolve.
pub fn ball_mass(p: &FlatGaussianParams, trials: usize, seed: RngSeed) -> Result<Estimate> {
    p.validate()?;
    check_trials("inner_trials", trials)?;
    let d = p.dim();
    let r_hat = radial_direction(&p.u);
    let slab = count_hits(trials, seed.derive(0), |rng| {
        slab_fails(p, &r_hat, &uniform_ball(rng, d - 1, DISK_RADIUS))
    });
    let cap = count_hits(trials, seed.derive(1), |rng| {
        cap_fails(p, &uniform_band_direction(rng, d))
    });
    let (s, c) = (
        Estimate::binomial(slab, trials),
        Estimate::binomial(cap, trials),
    );
    // Delta method for the product of independent proportions.
    let var = (c.value * s.half_width).powi(2) + (s.value * c.half_width).powi(2);
    Ok(Estimate {
        value: s.value * c.value,
        half_width: var.sqrt(),
    })
}

/// Reference member that maximizes the ball mass: centered mean and a thin
/// direction away from the edge of N.
pub fn designed_reference(k: u32, d: usize) -> Result<FlatGaussianParams> {
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    FlatGaussianParams::new(k, vec![0.0; d - 1], u)
}

/// r̂_k: the largest certified-ball mass over the designed reference and
/// `outer_trials` sampled references. The certificates only prove
/// separation, so this overestimates the true r_k.
pub fn estimate_rk(
    k: u32,
    d: usize,
    outer_trials: usize,
    inner_trials: usize,
    seed: RngSeed,
) -> Result<Estimate> {
    check_dim(d)?;
    let mut refs = vec![designed_reference(k, d)?];
    for j in 0..outer_trials {
        refs.push(sample_instance(k, d, &mut seed.derive2(1, j as u64).rng())?);
    }
    let inner = seed.derive(2);
    let masses = refs
        .iter()
        .map(|p| ball_mass(p, inner_trials, inner))
        .collect::<Result<Vec<_>>>()?;
    Ok(masses
        .into_iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .expect("designed reference present"))
}

/// Frequency, over Q ∼ 𝒰(Q_k), of Q^{d−1}(x) ≥ c·u_k.
pub fn alternative_mass(
    x: &[Vec<f64>],
    k: u32,
    d: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<Estimate> {
    check_dim(d)?;
    check_trials("q_trials", trials)?;
    if x.len() != d - 1 || x.iter().any(|p| p.len() != d) {
        return Err(Error::invalid(
            "x",
            format!("need {} points of dimension {d}", d - 1),
        ));
    }
    let threshold = log_c(d) + log_u_k(k, d);
    let hits = count_hits(trials, seed, |rng| {
        let q = sample_instance(k, d, rng).expect("validated");
        x.iter().map(|p| q.log_density(p)).sum::<f64>() >= threshold
    });
    Ok(Estimate::binomial(hits, trials))
}

/// Corner of B farthest from T: every point at radius 1/2, height 2.
pub fn designed_far_point(d: usize) -> Vec<Vec<f64>> {
    let mut p = vec![0.0; d];
    p[0] = CylinderSpec::RADIUS;
    p[d - 1] = CylinderSpec::HEIGHT.1;
    vec![p; d - 1]
}

/// ŝ_k: the smallest alternative mass over the designed far point and
/// `x_trials` uniform draws from B. A sampled minimum, not a bound.
pub fn estimate_sk(
    k: u32,
    d: usize,
    x_trials: usize,
    q_trials: usize,
    seed: RngSeed,
) -> Result<Estimate> {
    check_dim(d)?;
    let cyl = CylinderSpec::new(d)?;
    let mut xs = vec![designed_far_point(d)];
    for j in 0..x_trials {
        let mut rng = seed.derive2(1, j as u64).rng();
        let pts = (0..d - 1)
            .map(|_| {
                let mut p = Vec::with_capacity(d);
                cyl.sample_into(&mut rng, &mut p);
                p
            })
            .collect();
        xs.push(pts);
    }
    let inner = seed.derive(2);
    let masses = xs
        .iter()
        .map(|x| alternative_mass(x, k, d, q_trials, inner))
        .collect::<Result<Vec<_>>>()?;
    Ok(masses
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("designed point present"))
}
