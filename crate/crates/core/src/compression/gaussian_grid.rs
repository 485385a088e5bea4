//! Grid-correction compression for Gaussians: the decoder fits an anchor
//! (μ̄, Σ̄) to the forwarded samples and applies the correction addressed by
//! the bitstring, N(μ̄ + Σ̄^{1/2}δ, Σ̄^{1/2}(I+Δ)Σ̄^{1/2}).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::bits::Bits;
use super::fit::{gaussian_fit, robust_gaussian_fit};
use super::grid::{Axis, GridSpec};
use super::set::{check_cap, CandidateSet, CompressionScheme, DecoderId, Encoding, Provenance};
use crate::distributions::{Dataset, Distribution, GaussianParams, MIN_EIGENVALUE};
use crate::error::{Error, Result};

/// Largest number of raw correction matrices enumerated before the
/// positive-definiteness filter.
const MAX_RAW_CORRECTIONS: u128 = 10_000_000;

/// Where the grid is centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// Empirical mean and covariance of the forwarded samples.
    #[default]
    Empirical,
    /// Median/MAD style fit, tolerant to contaminated samples.
    Robust,
    /// A fixed reference that ignores the samples.
    Fixed(GaussianParams),
}

impl Anchor {
    pub fn fit(&self, data: &Dataset) -> Result<GaussianParams> {
        match self {
            Anchor::Empirical => gaussian_fit(data),
            Anchor::Robust => robust_gaussian_fit(data),
            Anchor::Fixed(g) => {
                if g.dim() != data.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: g.dim(),
                        got: data.dim(),
                    });
                }
                Ok(g.clone())
            }
        }
    }

    pub fn decoder(&self) -> DecoderId {
        match self {
            Anchor::Empirical => DecoderId::GaussianGrid,
            Anchor::Robust => DecoderId::RobustGaussianGrid,
            Anchor::Fixed(_) => DecoderId::FixedGaussianGrid,
        }
    }

    /// Fraction of forwarded samples that may be corrupted.
    pub fn robustness(&self) -> f64 {
        match self {
            Anchor::Robust => 2.0 / 3.0,
            _ => 0.0,
        }
    }
}

/// The whitened frame of an anchor fit.
struct Frame {
    mean: DVector<f64>,
    root: DMatrix<f64>,
    inv_root: DMatrix<f64>,
}

impl Frame {
    fn new(g: &GaussianParams) -> Self {
        let (root, inv_root) = g.sqrt_covariance();
        Frame {
            mean: g.mean_vector(),
            root,
            inv_root,
        }
    }
}

/// Gaussian decoder over fixed correction grids.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGrid {
    grid: GridSpec,
    anchor: Anchor,
    dim: usize,
    mu: Axis,
    sigma: Axis,
}

impl GaussianGrid {
    pub fn new(grid: GridSpec, dim: usize, anchor: Anchor) -> Result<Self> {
        grid.validate()?;
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        Ok(GaussianGrid {
            mu: grid.mu_axis()?,
            sigma: grid.sigma_axis()?,
            grid,
            anchor,
            dim,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    fn corrections(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    /// Total bit width: d mean codes and d(d+1)/2 correction codes.
    pub fn bit_width(&self) -> usize {
        self.dim * self.mu.width() as usize + self.corrections() * self.sigma.width() as usize
    }

    pub fn scheme(&self, m: usize) -> CompressionScheme {
        CompressionScheme {
            tau: m,
            bits: self.bit_width(),
            decoder: self.anchor.decoder(),
            robustness: self.anchor.robustness(),
        }
    }

    fn check_dim(&self, data: &Dataset) -> Result<()> {
        if data.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: data.dim(),
            });
        }
        Ok(())
    }

    /// I + Δ for correction codes (upper triangle, row-major), or None if
    /// it is not positive definite.
    fn correction_matrix(&self, codes: &[usize]) -> Result<Option<DMatrix<f64>>> {
        let d = self.dim;
        let mut m = DMatrix::identity(d, d);
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                let v = self.sigma.value(codes[k]).ok_or_else(|| {
                    Error::MalformedEncoding(format!("correction code {} out of range", codes[k]))
                })?;
                m[(i, j)] += v;
                if i != j {
                    m[(j, i)] += v;
                }
                k += 1;
            }
        }
        let pd = if d == 1 {
            m[(0, 0)] > MIN_EIGENVALUE
        } else {
            SymmetricEigen::new(m.clone()).eigenvalues.min() > MIN_EIGENVALUE
        };
        Ok(pd.then_some(m))
    }

    fn build(
        &self,
        frame: &Frame,
        mu_codes: &[usize],
        corr: &DMatrix<f64>,
    ) -> Result<GaussianParams> {
        let delta = DVector::from_iterator(
            self.dim,
            mu_codes
                .iter()
                .map(|&c| {
                    self.mu.value(c).ok_or_else(|| {
                        Error::MalformedEncoding(format!("mean code {c} out of range"))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        );
        if self.dim == 1 {
            let s = frame.root[(0, 0)];
            return GaussianParams::univariate(frame.mean[0] + s * delta[0], s * s * corr[(0, 0)]);
        }
        let mean = &frame.mean + &frame.root * delta;
        let cov = &frame.root * corr * &frame.root;
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianParams::from_nalgebra(&mean, &cov)
    }

    fn bits_for(&self, mu_codes: &[usize], corr_codes: &[usize]) -> Bits {
        let mut b = Bits::default();
        for &c in mu_codes {
            b.push_uint(c, self.mu.width());
        }
        for &c in corr_codes {
            b.push_uint(c, self.sigma.width());
        }
        b
    }

    /// Correction codes of every positive-definite I + Δ, in ascending
    /// value order, with their matrices.
    fn admissible_corrections(&self) -> Result<Vec<(Vec<usize>, DMatrix<f64>)>> {
        let p = self.corrections();
        let n = self.sigma.len();
        let raw = (n as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
        if raw > MAX_RAW_CORRECTIONS {
            return Err(Error::CapExceeded {
                what: "covariance corrections before filtering".into(),
                required: raw,
                cap: MAX_RAW_CORRECTIONS,
            });
        }
        let mut out = Vec::new();
        let mut pos = vec![0usize; p];
        loop {
            let codes: Vec<usize> = pos.iter().map(|&q| self.sigma.code_at(q)).collect();
            if let Some(m) = self.correction_matrix(&codes)? {
                out.push((codes, m));
            }
            if !odometer(&mut pos, n) {
                break;
            }
        }
        Ok(out)
    }

    /// Every grid candidate around the anchor fit of `public`. Means vary
    /// slowest; within a mean, corrections follow ascending grid order.
    pub fn candidates(&self, public: &Dataset, cap: usize) -> Result<CandidateSet> {
        self.check_dim(public)?;
        let frame = Frame::new(&self.anchor.fit(public)?);
        let corrections = self.admissible_corrections()?;
        let n_mu = (self.mu.len() as u128).saturating_pow(self.dim as u32);
        check_cap(
            "gaussian grid candidates",
            n_mu * corrections.len() as u128,
            cap,
        )?;
        let indices: Vec<usize> = (0..public.len()).collect();
        let total = n_mu as usize * corrections.len();
        let mut hyps = Vec::with_capacity(total);
        let mut prov = Vec::with_capacity(total);
        let mut pos = vec![0usize; self.dim];
        loop {
            let mu_codes: Vec<usize> = pos.iter().map(|&q| self.mu.code_at(q)).collect();
            for (corr_codes, corr) in &corrections {
                hyps.push(Distribution::Gaussian(self.build(&frame, &mu_codes, corr)?));
                let mut grid_indices = mu_codes.clone();
                grid_indices.extend_from_slice(corr_codes);
                prov.push(Provenance {
                    indices: indices.clone(),
                    bitstring: self.bits_for(&mu_codes, corr_codes),
                    grid_indices,
                });
            }
            if !odometer(&mut pos, self.mu.len()) {
                break;
            }
        }
        CandidateSet::new(hyps, prov)
    }

    /// Encodes `target` as the grid point nearest it in the whitened frame
    /// of the fit. The flag is set when some coordinate had to be clamped
    /// to the grid boundary.
    pub fn encode(&self, target: &GaussianParams, public: &Dataset) -> Result<(Encoding, bool)> {
        self.check_dim(public)?;
        if target.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: target.dim(),
            });
        }
        let frame = Frame::new(&self.anchor.fit(public)?);
        let delta = &frame.inv_root * (target.mean_vector() - &frame.mean);
        let mut clamped = false;
        let mu_codes: Vec<usize> = delta
            .iter()
            .map(|&x| {
                let (c, f) = self.mu.nearest(x);
                clamped |= f;
                c
            })
            .collect();
        let white = &frame.inv_root * target.covariance_matrix() * &frame.inv_root;
        let d = self.dim;
        let mut corr_codes = Vec::with_capacity(self.corrections());
        for i in 0..d {
            for j in i..d {
                let v = 0.5 * (white[(i, j)] + white[(j, i)]) - if i == j { 1.0 } else { 0.0 };
                let (c, f) = self.sigma.nearest(v);
                clamped |= f;
                corr_codes.push(c);
            }
        }
        if self.correction_matrix(&corr_codes)?.is_none() {
            // rounding left the PD cone: take the admissible correction
            // whose covariance is nearest in Frobenius norm
            let tcov = target.covariance_matrix();
            let best = self
                .admissible_corrections()?
                .into_iter()
                .map(|(codes, m)| {
                    let cov = &frame.root * m * &frame.root;
                    ((cov - &tcov).norm(), codes)
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .ok_or_else(|| {
                    Error::invalid("grid", "no positive-definite covariance correction")
                })?;
            corr_codes = best.1;
            clamped = true;
        }
        let enc = Encoding {
            indices: (0..public.len()).collect(),
            bits: self.bits_for(&mu_codes, &corr_codes),
        };
        Ok((enc, clamped))
    }

    /// Decodes against the forwarded samples of `source`.
    pub fn decode(&self, enc: &Encoding, source: &Dataset) -> Result<GaussianParams> {
        self.check_dim(source)?;
        enc.check(&self.scheme(enc.indices.len()), source.len())?;
        let mut pos = 0;
        let mu_codes = (0..self.dim)
            .map(|_| enc.bits.read_uint(&mut pos, self.mu.width()))
            .collect::<Result<Vec<_>>>()?;
        let corr_codes = (0..self.corrections())
            .map(|_| enc.bits.read_uint(&mut pos, self.sigma.width()))
            .collect::<Result<Vec<_>>>()?;
        let corr = self
            .correction_matrix(&corr_codes)?
            .ok_or(Error::NotPositiveDefinite {
                min_eigenvalue: f64::NAN,
            })?;
        let frame = Frame::new(&self.anchor.fit(&source.select(&enc.indices))?);
        self.build(&frame, &mu_codes, &corr)
    }
}

/// Advances a counter with a common radix (last digit fastest); false on
/// wrap.
pub(crate) fn odometer(pos: &mut [usize], radix: usize) -> bool {
    for p in pos.iter_mut().rev() {
        *p += 1;
        if *p < radix {
            return true;
        }
        *p = 0;
    }
    false
}

/// As [`odometer`] with a radix per digit.
pub(crate) fn odometer_mixed(pos: &mut [usize], radix: &[usize]) -> bool {
    for (p, &r) in pos.iter_mut().zip(radix).rev() {
        *p += 1;
        if *p < r {
            return true;
        }
        *p = 0;
    }
    false
}

/// Every grid candidate for `public` around its empirical fit.
pub fn gaussian_candidate_grid(
    public: &Dataset,
    grid: &GridSpec,
    cap: usize,
) -> Result<CandidateSet> {
    GaussianGrid::new(*grid, public.dim(), Anchor::Empirical)?.candidates(public, cap)
}

/// Encodes `target` relative to the empirical fit of `public`.
pub fn encode_gaussian(
    target: &GaussianParams,
    public: &Dataset,
    grid: &GridSpec,
) -> Result<(Encoding, bool)> {
    GaussianGrid::new(*grid, public.dim(), Anchor::Empirical)?.encode(target, public)
}
