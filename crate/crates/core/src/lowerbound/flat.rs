//! The flat Gaussian family: variance 1/k² along one unit direction `u`,
//! unit variance orthogonal to it, mean on the disk T in the first d−1
//! coordinates.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::distributions::GaussianParams;
use crate::error::{Error, Result};

/// Radius of the mean disk T.
pub const DISK_RADIUS: f64 = 0.5;
/// Largest admissible |u·e_d| for directions in N.
pub const BAND_LIMIT: f64 = 0.866_025_403_784_438_6;
/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const UNIT_TOL: f64 = 1e-12;

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::invalid(
            "d",
            format!("must be in 2..={MAX_DIM}, got {d}"),
        ));
    }
    Ok(())
}

/// One member G(1/k, t, u) of the hard family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatGaussianParams {
    pub k: u32,
    /// Mean in the first d−1 coordinates; the last coordinate is zero.
    pub t: Vec<f64>,
    /// Thin direction, a unit vector in ℝ^d.
    pub u: Vec<f64>,
}

impl FlatGaussianParams {
    pub fn new(k: u32, t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let p = FlatGaussianParams { k, t, u };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.u.len();
        check_dim(d)?;
        if self.k == 0 {
            return Err(Error::invalid("k", "must be positive"));
        }
        if self.t.len() != d - 1 {
            return Err(Error::DimensionMismatch {
                expected: d - 1,
                got: self.t.len(),
            });
        }
        if norm(&self.t) > DISK_RADIUS {
            return Err(Error::invalid("t", "must lie in the disk of radius 1/2"));
        }
        if (norm(&self.u) - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid("u", "must be a unit vector"));
        }
        if self.u[d - 1].abs() > BAND_LIMIT {
            return Err(Error::invalid("u", "|u·e_d| must be at most √3/2"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn sigma(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// Mean embedded in ℝ^d.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = self.t.clone();
        m.push(0.0);
        m
    }

    /// Mahalanobis form (x−μ)ᵀΣ⁻¹(x−μ) = ‖Δ‖² + (k²−1)(u·Δ)².
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut sq = 0.0;
        let mut proj = 0.0;
        for i in 0..d {
            let delta = x[i] - if i + 1 < d { self.t[i] } else { 0.0 };
            sq += delta * delta;
            proj += delta * self.u[i];
        }
        let k2 = (self.k as f64).powi(2);
        sq + (k2 - 1.0) * proj * proj
    }

    /// Log density; the covariance has determinant 1/k².
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        -0.5 * d * LN_2PI + (self.k as f64).ln() - 0.5 * self.quadratic_form(x)
    }

    /// Draws x = μ + z + (σ−1)(u·z)u with z standard normal, which has
    /// covariance I + (σ²−1)uuᵀ.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let d = self.dim();
        out.clear();
        let mut proj = 0.0;
        for i in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            proj += z * self.u[i];
            out.push(z);
        }
        let shrink = (self.sigma() - 1.0) * proj;
        for i in 0..d {
            out[i] += shrink * self.u[i];
            if i + 1 < d {
                out[i] += self.t[i];
            }
        }
    }

    /// The family member as a general Gaussian, with R_u completed from the
    /// Householder reflection that sends e_0 to u.
    pub fn to_gaussian(&self) -> Result<GaussianParams> {
        self.to_gaussian_with_pivot(0)
    }

    /// As [`Self::to_gaussian`], but reflecting e_pivot onto u. Different
    /// pivots give different completions of {u}^⊥ and the same Gaussian.
    pub fn to_gaussian_with_pivot(&self, pivot: usize) -> Result<GaussianParams> {
        let d = self.dim();
        if pivot >= d {
            return Err(Error::invalid("pivot", format!("must be below {d}")));
        }
        let r = rotation(&self.u, pivot);
        let s2 = self.sigma().powi(2);
        let mut cov = vec![vec![0.0; d]; d];
        for (a, row) in cov.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                let mut v = 0.0;
                for (j, col) in r.iter().enumerate() {
                    let scale = if j == 0 { s2 } else { 1.0 };
                    v += scale * col[a] * col[b];
                }
                *cell = v;
            }
        }
        // Symmetrize away rounding so the constructor's check is not tripped.
        for a in 0..d {
            for b in 0..a {
                let avg = 0.5 * (cov[a][b] + cov[b][a]);
                cov[a][b] = avg;
                cov[b][a] = avg;
            }
        }
        GaussianParams::new(self.mean(), cov)
    }
}

/// Columns [u, v_2, …, v_d] of R_u: the Householder reflection H with
/// H e_pivot = u, with column `pivot` moved to the front.
pub fn rotation(u: &[f64], pivot: usize) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut w: Vec<f64> = u.iter().map(|x| -x).collect();
    w[pivot] += 1.0;
    let wn2: f64 = w.iter().map(|x| x * x).sum();
    let column = |j: usize| -> Vec<f64> {
        (0..d)
            .map(|i| {
                let id = if i == j { 1.0 } else { 0.0 };
                if wn2 < 1e-300 {
                    id
                } else {
                    id - 2.0 * w[i] * w[j] / wn2
                }
            })
            .collect()
    };
    let mut cols = vec![column(pivot)];
    cols.extend((0..d).filter(|&j| j != pivot).map(column));
    cols
}

/// The cylinder C: radius 1/2 around the e_d axis, heights [1, 2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub d: usize,
}

impl CylinderSpec {
    pub const RADIUS: f64 = 0.5;
    pub const HEIGHT: (f64, f64) = (1.0, 2.0);

    pub fn new(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(CylinderSpec { d })
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(in_cylinder(x))
    }

    /// Uniform point of C.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend(uniform_ball(rng, self.d - 1, Self::RADIUS));
        out.push(rng.random_range(Self::HEIGHT.0..=Self::HEIGHT.1));
    }
}

/// Membership in C for a point of any dimension ≥ 2.
pub fn in_cylinder(x: &[f64]) -> bool {
    let (radial, last) = x.split_at(x.len() - 1);
    let h = last[0];
    norm(radial) <= CylinderSpec::RADIUS
        && (CylinderSpec::HEIGHT.0..=CylinderSpec::HEIGHT.1).contains(&h)
}

/// Uniform draw from 𝒰(Q_k): t uniform on T, u uniform on N.
pub fn sample_instance<R: Rng + ?Sized>(
    k: u32,
    d: usize,
    rng: &mut R,
) -> Result<FlatGaussianParams> {
    check_dim(d)?;
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    let t = uniform_ball(rng, d - 1, DISK_RADIUS);
    let u = uniform_band_direction(rng, d);
    Ok(FlatGaussianParams { k, t, u })
}

/// Rejection from the cube.
pub(crate) fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-radius..=radius))
            .collect();
        if norm(&v) <= radius {
            return v;
        }
    }
}

/// Uniform on S^{d−1} restricted to |u·e_d| ≤ √3/2.
pub(crate) fn uniform_band_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let u = uniform_sphere(rng, d);
        if u[d - 1].abs() <= BAND_LIMIT {
            return u;
        }
    }
}

pub(crate) fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Fraction of S^{d−1} covered by the cap of half-angle θ around a pole.
pub fn cap_fraction(d: usize, theta: f64) -> f64 {
    let theta = theta.clamp(0.0, PI);
    // Area(C(u,θ)) / Area(S^{d-1}) = Γ(d/2) / (√π Γ((d−1)/2)) ∫_0^θ sin^{d−2}.
    let df = d as f64;
    let ln_const = ln_gamma(df / 2.0) - 0.5 * PI.ln() - ln_gamma((df - 1.0) / 2.0);
    let steps = 4096;
    let h = theta / steps as f64;
    let f = |x: f64| x.sin().powi(d as i32 - 2);
    // Simpson's rule.
    let mut acc = f(0.0) + f(theta);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    ln_const.exp() * acc * h / 3.0
}

/// Probability that a uniform direction on the sphere lands in N.
pub fn band_fraction(d: usize) -> f64 {
    1.0 - 2.0 * cap_fraction(d, PI / 6.0)
}

/// u_k = ((2π)^{−d/2}·k·e^{−1/2})^{d−1}, the largest joint density a member
/// of Q_k assigns to d−1 points of C.
pub fn u_k_value(k: u32, d: usize) -> f64 {
    log_u_k(k, d).exp()
}

pub fn log_u_k(k: u32, d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) * (-0.5 * df * LN_2PI + (k as f64).ln() - 0.5)
}

/// c = (e^{−5}/e^{−1/2})^{d−1} = exp(−9(d−1)/2).
pub fn c_value(d: usize) -> f64 {
    log_c(d).exp()
}

pub fn log_c(d: usize) -> f64 {
    -4.5 * (d as f64 - 1.0)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;
    use approx::assert_relative_eq;
    use proptest::prelude::{any, prop_assert, proptest};

    fn random_params(seed: u64, d: usize, k: u32) -> FlatGaussianParams {
        sample_instance(k, d, &mut RngSeed(seed).rng()).unwrap()
    }

    #[test]
    fn axis_aligned_covariance() {
        let p = FlatGaussianParams::new(10, vec![0.0], vec![1.0, 0.0]).unwrap();
        let g = p.to_gaussian().unwrap();
        let c = g.covariance();
        assert_relative_eq!(c[0], 0.01, epsilon = 1e-15);
        assert_relative_eq!(c[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(c[3], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn density_at_mean_is_normalizer() {
        for d in 2..=4 {
            let p = random_params(d as u64, d, 7);
            let expect = (2.0 * PI).powf(-(d as f64) / 2.0) * 7.0;
            assert_relative_eq!(p.log_density(&p.mean()).exp(), expect, max_relative = 1e-12);
            let g = p.to_gaussian().unwrap();
            assert_relative_eq!(
                g.log_density(&p.mean()).unwrap().exp(),
                expect,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn rotation_is_orthonormal() {
        for d in 2..=4 {
            let p = random_params(10 + d as u64, d, 3);
            for pivot in 0..d {
                let r = rotation(&p.u, pivot);
                assert_relative_eq!(dot(&r[0], &p.u), 1.0, epsilon = 1e-12);
                for a in 0..d {
                    for b in 0..d {
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((dot(&r[a], &r[b]) - want).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn completion_choice_does_not_change_density() {
        let mut rng = RngSeed(5).rng();
        for d in 2..=4 {
            let p = random_params(20 + d as u64, d, 40);
            let a = p.to_gaussian_with_pivot(0).unwrap();
            let b = p.to_gaussian_with_pivot(d - 1).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (la, lb) = (a.log_density(&x).unwrap(), b.log_density(&x).unwrap());
                assert!((la.exp() - lb.exp()).abs() < 1e-10);
                assert_relative_eq!(la, p.log_density(&x), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn cylinder_membership() {
        assert!(in_cylinder(&[0.2, 1.5]));
        assert!(!in_cylinder(&[0.6, 1.5]));
        assert!(!in_cylinder(&[0.2, 0.5]));
        let c = CylinderSpec::new(3).unwrap();
        assert!(c.contains(&[0.3, 0.3, 1.0]).unwrap());
        assert!(c.contains(&[0.2, 1.5]).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_relative_eq!(
            u_k_value(10, 2),
            10.0 * (-0.5f64).exp() / (2.0 * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(u_k_value(10, 2), 0.965_32, epsilon = 1e-5);
        assert_relative_eq!(c_value(2), (-4.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(
            c_value(3),
            (-5.0f64).exp().powi(2) / (-0.5f64).exp().powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn u_k_dominates_sampled_likelihoods() {
        let mut rng = RngSeed(9).rng();
        for d in 2..=3 {
            let cyl = CylinderSpec::new(d).unwrap();
            let mut x = Vec::new();
            for _ in 0..10_000 {
                let q = sample_instance(20, d, &mut rng).unwrap();
                let mut joint = 0.0;
                for _ in 0..d - 1 {
                    cyl.sample_into(&mut rng, &mut x);
                    joint += q.log_density(&x);
                }
                assert!(joint.exp() <= u_k_value(20, d) * (1.0 + 1e-9));
            }
            // The supremum is attained at t = 0, u = e_1, x = e_d.
            let q = FlatGaussianParams::new(20, vec![0.0; d - 1], {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            })
            .unwrap();
            let mut e_d = vec![0.0; d];
            e_d[d - 1] = 1.0;
            assert_relative_eq!(
                (d - 1) as f64 * q.log_density(&e_d),
                log_u_k(20, d),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn band_fraction_matches_geometry() {
        // On the circle N removes four arcs of π/6; on S² each cap has area fraction (1−cos θ)/2.
        assert_relative_eq!(band_fraction(2), 2.0 / 3.0, epsilon = 1e-10);
        assert_relative_eq!(band_fraction(3), 3f64.sqrt() / 2.0, epsilon = 1e-10);
        for d in 2..=4 {
            let mut rng = RngSeed(d as u64).rng();
            let n = 100_000;
            let hits = (0..n)
                .filter(|_| uniform_sphere(&mut rng, d)[d - 1].abs() <= BAND_LIMIT)
                .count();
            assert!((hits as f64 / n as f64 - band_fraction(d)).abs() < 0.01);
        }
    }

    #[test]
    fn disk_draws_are_centered() {
        let mut rng = RngSeed(3).rng();
        let n = 100_000;
        let mut mean = [0.0; 2];
        for _ in 0..n {
            let t = uniform_ball(&mut rng, 2, DISK_RADIUS);
            mean[0] += t[0] / n as f64;
            mean[1] += t[1] / n as f64;
        }
        assert!(mean.iter().all(|m| m.abs() < 0.01));
    }

    #[test]
    fn sampler_matches_covariance() {
        let p = random_params(77, 3, 5);
        let g = p.to_gaussian().unwrap();
        let mut rng = RngSeed(1).rng();
        let n = 200_000;
        let mut x = Vec::new();
        let mut m2 = [0.0; 9];
        let mu = p.mean();
        for _ in 0..n {
            p.sample_into(&mut rng, &mut x);
            for a in 0..3 {
                for b in 0..3 {
                    m2[a * 3 + b] += (x[a] - mu[a]) * (x[b] - mu[b]) / n as f64;
                }
            }
        }
        for (got, want) in m2.iter().zip(g.covariance()) {
            assert!((got - want).abs() < 0.02, "{got} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn spectrum_is_flat(seed in any::<u64>(), d in 2usize..=4, k in 1u32..200) {
            let p = random_params(seed, d, k);
            prop_assert!(p.validate().is_ok());
            let mut ev = p.to_gaussian().unwrap().eigenvalues();
            ev.sort_by(f64::total_cmp);
            prop_assert!((ev[0] - 1.0 / (k as f64).powi(2)).abs() < 1e-9);
            for e in &ev[1..] {
                prop_assert!((e - 1.0).abs() < 1e-9);
            }
        }
    }
}
