//! Total variation distance: exact crossings for univariate Gaussians,
//! grid-located crossings for univariate normal mixtures, exact sums for
//! finite distributions, and a two-sample Monte-Carlo estimator otherwise.

use serde::{Deserialize, Serialize};

use super::{normal, Distribution, GaussianParams};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

pub const MIN_MC_TRIALS: usize = 100;

/// Grid resolution used to locate crossings of two normal mixtures.
pub const MIXTURE_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    /// Closed-form crossings of two univariate Gaussians.
    Exact1d,
    /// Crossings of two univariate normal mixtures located on a grid,
    /// with masses from normal CDFs.
    Crossings1d,
    /// Exact sum over a finite domain.
    Finite,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub value: f64,
    /// 95% half-width; zero for deterministic methods.
    pub half_width: f64,
    pub method: TvMethod,
}

impl TvEstimate {
    fn exact(value: f64, method: TvMethod) -> Self {
        TvEstimate {
            value: value.clamp(0.0, 1.0),
            half_width: 0.0,
            method,
        }
    }
}

/// The open set {x : N(μ₁,σ₁²)(x) > N(μ₂,σ₂²)(x)}, as at most two intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    Empty,
    All,
    Above(f64),
    Below(f64),
    Inside(f64, f64),
    Outside(f64, f64),
}

impl Crossing {
    /// Set where the first density strictly exceeds the second.
    ///
    /// Writing y = x − μ₁ and Δ = μ₂ − μ₁, twice the log-ratio is
    /// a·y² + b·y + c with a = 1/σ₂² − 1/σ₁², b = −2Δ/σ₂²,
    /// c = Δ²/σ₂² + ln(σ₂²/σ₁²).
    pub fn between(mu1: f64, sd1: f64, mu2: f64, sd2: f64) -> Crossing {
        let (v1, v2) = (sd1 * sd1, sd2 * sd2);
        let delta = mu2 - mu1;
        let a = 1.0 / v2 - 1.0 / v1;
        let b = -2.0 * delta / v2;
        let c = delta * delta / v2 + (v2 / v1).ln();
        if a == 0.0 {
            if b == 0.0 {
                return if c > 0.0 {
                    Crossing::All
                } else {
                    Crossing::Empty
                };
            }
            let root = mu1 - c / b;
            return if b > 0.0 {
                Crossing::Above(root)
            } else {
                Crossing::Below(root)
            };
        }
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return if a > 0.0 {
                Crossing::All
            } else {
                Crossing::Empty
            };
        }
        // stable roots: q = −(b + sgn(b)√disc)/2, roots q/a and c/q
        let sq = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        let (mut r1, mut r2) = (q / a, if q != 0.0 { c / q } else { -q / a });
        if r1 > r2 {
            std::mem::swap(&mut r1, &mut r2);
        }
        let (r1, r2) = (mu1 + r1, mu1 + r2);
        if !(r1 < r2) {
            return if a > 0.0 {
                Crossing::All
            } else {
                Crossing::Empty
            };
        }
        if a > 0.0 {
            Crossing::Outside(r1, r2)
        } else {
            Crossing::Inside(r1, r2)
        }
    }

    /// The open complement, ignoring boundary points.
    pub fn complement(self) -> Crossing {
        match self {
            Crossing::Empty => Crossing::All,
            Crossing::All => Crossing::Empty,
            Crossing::Above(r) => Crossing::Below(r),
            Crossing::Below(r) => Crossing::Above(r),
            Crossing::Inside(a, b) => Crossing::Outside(a, b),
            Crossing::Outside(a, b) => Crossing::Inside(a, b),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            Crossing::Empty => false,
            Crossing::All => true,
            Crossing::Above(r) => x > r,
            Crossing::Below(r) => x < r,
            Crossing::Inside(a, b) => a < x && x < b,
            Crossing::Outside(a, b) => x < a || x > b,
        }
    }

    /// Mass of the set under N(μ, σ²).
    pub fn mass(self, mu: f64, sd: f64) -> f64 {
        let z = |x: f64| (x - mu) / sd;
        match self {
            Crossing::Empty => 0.0,
            Crossing::All => 1.0,
            Crossing::Above(r) => normal::sf(z(r)),
            Crossing::Below(r) => normal::cdf(z(r)),
            Crossing::Inside(a, b) => normal::mass(z(a), z(b)),
            Crossing::Outside(a, b) => (normal::cdf(z(a)) + normal::sf(z(b))).min(1.0),
        }
    }

    /// Number of points of an ascending slice lying in the set.
    pub fn count_sorted(self, sorted: &[f64]) -> usize {
        let n = sorted.len();
        // number of entries ≤ r, and < r
        let le = |r: f64| sorted.partition_point(|&x| x <= r);
        let lt = |r: f64| sorted.partition_point(|&x| x < r);
        match self {
            Crossing::Empty => 0,
            Crossing::All => n,
            Crossing::Above(r) => n - le(r),
            Crossing::Below(r) => lt(r),
            Crossing::Inside(a, b) => lt(b).saturating_sub(le(a)),
            Crossing::Outside(a, b) => lt(a) + (n - le(b)),
        }
    }
}

/// Exact TV between two univariate Gaussians: P(A) − Q(A) for A = {p > q}.
pub fn tv_exact_gaussian_1d(p: &GaussianParams, q: &GaussianParams) -> Result<f64> {
    let (Some((m1, s1)), Some((m2, s2))) = (p.as_univariate(), q.as_univariate()) else {
        return Err(Error::invalid(
            "tv_exact_gaussian_1d",
            "both arguments must be univariate",
        ));
    };
    Ok(tv_normal_pair(m1, s1, m2, s2))
}

pub(crate) fn tv_normal_pair(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    if m1 == m2 && s1 == s2 {
        return 0.0;
    }
    let a = Crossing::between(m1, s1, m2, s2);
    (a.mass(m1, s1) - a.mass(m2, s2)).clamp(0.0, 1.0)
}

/// A univariate normal mixture as (weight, μ, σ) triples.
pub type NormalMixture1d = [(f64, f64, f64)];

pub(crate) fn mixture_density_1d(m: &NormalMixture1d, x: f64) -> f64 {
    m.iter()
        .map(|&(w, mu, sd)| w * normal::pdf((x - mu) / sd) / sd)
        .sum()
}

pub(crate) fn mixture_mass_1d(m: &NormalMixture1d, intervals: &[(f64, f64)]) -> f64 {
    let total: f64 = intervals
        .iter()
        .map(|&(a, b)| {
            m.iter()
                .map(|&(w, mu, sd)| w * normal::mass((a - mu) / sd, (b - mu) / sd))
                .sum::<f64>()
        })
        .sum();
    total.clamp(0.0, 1.0)
}

/// Evaluation grid spanning ±10σ around every component of both mixtures.
pub(crate) fn crossing_grid(parts: &[&NormalMixture1d], points: usize) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in parts {
        for &(_, mu, sd) in m.iter() {
            lo = lo.min(mu - 10.0 * sd);
            hi = hi.max(mu + 10.0 * sd);
        }
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Open intervals where `diff > 0`, from values of a density difference on
/// `grid`. Roots are placed by linear interpolation; the sign at each grid
/// end extends to infinity.
pub(crate) fn positive_intervals(grid: &[f64], diff: impl Fn(usize) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = if diff(0) > 0.0 {
        Some(f64::NEG_INFINITY)
    } else {
        None
    };
    let mut prev = diff(0);
    for i in 1..grid.len() {
        let cur = diff(i);
        let pos = cur > 0.0;
        if pos != start.is_some() {
            let root = if prev == cur {
                grid[i]
            } else {
                let t = prev / (prev - cur);
                grid[i - 1] + t.clamp(0.0, 1.0) * (grid[i] - grid[i - 1])
            };
            match start.take() {
                Some(s) => out.push((s, root)),
                None => start = Some(root),
            }
        }
        prev = cur;
    }
    if let Some(s) = start {
        out.push((s, f64::INFINITY));
    }
    out
}

/// TV between two univariate normal mixtures via located crossings.
pub fn tv_mixture_1d(p: &NormalMixture1d, q: &NormalMixture1d) -> f64 {
    let grid = crossing_grid(&[p, q], MIXTURE_GRID);
    let dp: Vec<f64> = grid.iter().map(|&x| mixture_density_1d(p, x)).collect();
    let dq: Vec<f64> = grid.iter().map(|&x| mixture_density_1d(q, x)).collect();
    let set = positive_intervals(&grid, |i| dp[i] - dq[i]);
    (mixture_mass_1d(p, &set) - mixture_mass_1d(q, &set)).clamp(0.0, 1.0)
}

/// Two-sample estimate of P_p[p > q] − P_q[p > q].
pub fn tv_monte_carlo(
    p: &Distribution,
    q: &Distribution,
    trials: usize,
    seed: RngSeed,
) -> Result<TvEstimate> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if trials < MIN_MC_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("must be at least {MIN_MC_TRIALS}"),
        ));
    }
    let mut rng = seed.rng();
    let mut buf = Vec::with_capacity(p.dim());
    let mut frac = |from: &Distribution, rng: &mut crate::rng::Rng| {
        let mut hits = 0usize;
        for _ in 0..trials {
            buf.clear();
            from.sample_into(rng, &mut buf);
            if p.log_density_unchecked(&buf) > q.log_density_unchecked(&buf) {
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    };
    let a = frac(p, &mut rng);
    let b = frac(q, &mut rng);
    let var = a * (1.0 - a) + b * (1.0 - b);
    Ok(TvEstimate {
        value: (a - b).clamp(0.0, 1.0),
        half_width: 1.96 * (var / trials as f64).sqrt(),
        method: TvMethod::MonteCarlo,
    })
}

/// TV using the most accurate available path.
pub fn tv_distance(
    p: &Distribution,
    q: &Distribution,
    trials: usize,
    seed: RngSeed,
) -> Result<TvEstimate> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if let (Some((m1, s1)), Some((m2, s2))) =
        (p.as_univariate_gaussian(), q.as_univariate_gaussian())
    {
        return Ok(TvEstimate::exact(
            tv_normal_pair(m1, s1, m2, s2),
            TvMethod::Exact1d,
        ));
    }
    if let (Some(a), Some(b)) = (p.as_finite(), q.as_finite()) {
        if a.domain_size() != b.domain_size() {
            return Err(Error::DimensionMismatch {
                expected: a.domain_size(),
                got: b.domain_size(),
            });
        }
        return Ok(TvEstimate::exact(a.tv(b), TvMethod::Finite));
    }
    if let (Some(a), Some(b)) = (p.as_normal_mixture_1d(), q.as_normal_mixture_1d()) {
        return Ok(TvEstimate::exact(
            tv_mixture_1d(&a, &b),
            TvMethod::Crossings1d,
        ));
    }
    tv_monte_carlo(p, q, trials, seed)
}

/// Smallest TV from `p` to any member of `list`, with its index.
pub fn point_set_distance(
    p: &Distribution,
    list: &[Distribution],
    trials: usize,
    seed: RngSeed,
) -> Result<(usize, TvEstimate)> {
    if list.is_empty() {
        return Err(Error::Empty("candidate list"));
    }
    let mut best: Option<(usize, TvEstimate)> = None;
    for (i, q) in list.iter().enumerate() {
        let est = tv_distance(p, q, trials, seed.derive(i as u64))?;
        if best.as_ref().is_none_or(|(_, b)| est.value < b.value) {
            best = Some((i, est));
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MixtureParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn n1(mu: f64, var: f64) -> GaussianParams {
        GaussianParams::univariate(mu, var).unwrap()
    }

    fn d1(mu: f64, var: f64) -> Distribution {
        n1(mu, var).into()
    }

    #[test]
    fn unit_shift() {
        let expect = 2.0 * normal::cdf(0.5) - 1.0;
        assert_relative_eq!(
            tv_exact_gaussian_1d(&n1(0.0, 1.0), &n1(1.0, 1.0)).unwrap(),
            expect,
            epsilon = 1e-14
        );
        assert_relative_eq!(expect, 0.382_924_922_548_026, epsilon = 1e-12);
        assert_eq!(
            tv_exact_gaussian_1d(&n1(0.0, 1.0), &n1(0.0, 1.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn crossing_branches() {
        assert!(
            matches!(Crossing::between(0.0, 1.0, 1.0, 1.0), Crossing::Below(r) if (r - 0.5).abs() < 1e-15)
        );
        assert!(
            matches!(Crossing::between(0.0, 1.0, 0.0, 2.0), Crossing::Inside(a, b) if (a + b).abs() < 1e-12)
        );
        assert!(matches!(
            Crossing::between(0.0, 2.0, 0.0, 1.0),
            Crossing::Outside(..)
        ));
        assert_eq!(Crossing::between(0.0, 1.0, 0.0, 1.0), Crossing::Empty);
        // N(0,1) vs N(0,4): x* = √(8 ln 2 / 3)
        let Crossing::Inside(a, b) = Crossing::between(0.0, 1.0, 0.0, 2.0) else {
            panic!()
        };
        let xs = (8.0 * 2f64.ln() / 3.0).sqrt();
        assert_relative_eq!(b, xs, epsilon = 1e-12);
        assert_relative_eq!(a, -xs, epsilon = 1e-12);
    }

    #[test]
    fn count_sorted_is_strict() {
        let xs = [-1.0, 0.0, 0.5, 1.0, 2.0];
        assert_eq!(Crossing::Below(0.5).count_sorted(&xs), 2);
        assert_eq!(Crossing::Above(0.5).count_sorted(&xs), 2);
        assert_eq!(Crossing::Inside(0.0, 1.0).count_sorted(&xs), 1);
        assert_eq!(Crossing::Outside(0.0, 1.0).count_sorted(&xs), 2);
        assert_eq!(Crossing::All.count_sorted(&xs), 5);
    }

    #[test]
    fn monte_carlo_examples() {
        let same = tv_monte_carlo(&d1(0.0, 1.0), &d1(0.0, 1.0), 10_000, RngSeed(1)).unwrap();
        assert!(same.value <= same.half_width + 1e-12, "{same:?}");
        let shift = tv_monte_carlo(&d1(0.0, 1.0), &d1(1.0, 1.0), 100_000, RngSeed(2)).unwrap();
        assert!(
            (shift.value - 0.382_924_922_548_026).abs() < 0.01,
            "{shift:?}"
        );
        let p: Distribution = GaussianParams::standard(2).unwrap().into();
        let q: Distribution =
            GaussianParams::new(vec![5.0, 5.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
                .unwrap()
                .into();
        assert!(tv_monte_carlo(&p, &q, 10_000, RngSeed(3)).unwrap().value >= 0.99);
        assert!(tv_monte_carlo(&p, &q, 99, RngSeed(3)).is_err());
    }

    #[test]
    fn point_set_examples() {
        let p = d1(0.0, 1.0);
        assert_eq!(
            point_set_distance(&p, std::slice::from_ref(&p), 1000, RngSeed(0))
                .unwrap()
                .1
                .value,
            0.0
        );
        let (i, e) =
            point_set_distance(&p, &[d1(1.0, 1.0), d1(2.0, 1.0)], 1000, RngSeed(0)).unwrap();
        assert_eq!(i, 0);
        assert_relative_eq!(e.value, 0.382_924_922_548_026, epsilon = 1e-12);
        assert_eq!(
            point_set_distance(&p, &[d1(0.0, 1.0), d1(10.0, 1.0)], 1000, RngSeed(0))
                .unwrap()
                .0,
            0
        );
        assert!(point_set_distance(&p, &[], 1000, RngSeed(0)).is_err());
    }

    #[test]
    fn mixture_of_one_matches_exact() {
        let a = [(1.0, 0.0, 1.0)];
        let b = [(1.0, 0.7, 1.6)];
        assert_relative_eq!(
            tv_mixture_1d(&a, &b),
            tv_normal_pair(0.0, 1.0, 0.7, 1.6),
            epsilon = 1e-6
        );
    }

    fn trapezoid_tv(p: &NormalMixture1d, q: &NormalMixture1d) -> f64 {
        let (lo, hi, n) = (-40.0, 40.0, 400_000);
        let h = (hi - lo) / n as f64;
        let f = |x: f64| (mixture_density_1d(p, x) - mixture_density_1d(q, x)).abs();
        let mut s = 0.5 * (f(lo) + f(hi));
        for i in 1..n {
            s += f(lo + h * i as f64);
        }
        0.5 * s * h
    }

    #[test]
    fn mixture_path_matches_quadrature() {
        let p = [(0.3, -1.0, 0.7), (0.7, 2.5, 1.2)];
        let q = [(0.5, -0.5, 1.0), (0.5, 3.0, 0.9)];
        assert_relative_eq!(tv_mixture_1d(&p, &q), trapezoid_tv(&p, &q), epsilon = 1e-5);
        let dp: Distribution =
            MixtureParams::new(vec![d1(-1.0, 0.49), d1(2.5, 1.44)], vec![0.3, 0.7])
                .unwrap()
                .into();
        let dq: Distribution =
            MixtureParams::new(vec![d1(-0.5, 1.0), d1(3.0, 0.81)], vec![0.5, 0.5])
                .unwrap()
                .into();
        let e = tv_distance(&dp, &dq, 1000, RngSeed(0)).unwrap();
        assert_eq!(e.method, TvMethod::Crossings1d);
        assert_relative_eq!(e.value, tv_mixture_1d(&p, &q), epsilon = 1e-12);
    }

    fn fact_lower_bound(m1: f64, v1: f64, m2: f64, v2: f64) -> f64 {
        let s1 = v1.sqrt();
        let r = ((v1 - v2).abs() / v1).max(40.0 * (m1 - m2).abs() / s1);
        r.min(1.0) / 200.0
    }

    proptest! {
        #[test]
        fn symmetric_bounded_and_above_fact(
            m1 in -5.0..5.0f64, v1 in 0.1..10.0f64, m2 in -5.0..5.0f64, v2 in 0.1..10.0f64
        ) {
            let a = tv_normal_pair(m1, v1.sqrt(), m2, v2.sqrt());
            let b = tv_normal_pair(m2, v2.sqrt(), m1, v1.sqrt());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(a >= fact_lower_bound(m1, v1, m2, v2));
        }

        #[test]
        fn triangle_inequality(
            m in proptest::array::uniform3(-5.0..5.0f64),
            v in proptest::array::uniform3(0.1..10.0f64),
        ) {
            let t = |i: usize, j: usize| tv_normal_pair(m[i], v[i].sqrt(), m[j], v[j].sqrt());
            prop_assert!(t(0, 2) <= t(0, 1) + t(1, 2) + 1e-12);
        }
    }
}
