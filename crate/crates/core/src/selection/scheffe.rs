//! Scheffé tables: candidate-side masses C[i][j] = P_i(A_ij) and empirical
//! masses Ê[i][j] of the sets A_ij = {x : p_i(x) > p_j(x)}.

use serde::{Deserialize, Serialize};

use crate::compression::CandidateSet;
use crate::distributions::tv::{
    crossing_grid, mixture_density_1d, mixture_mass_1d, Crossing, MIXTURE_GRID,
};
use crate::distributions::{Dataset, Distribution};
use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::yatracos::FiniteDist;

pub const MIN_SCHEFFE_TRIALS: usize = 1000;

/// Largest candidate set a tournament accepts. The Scheffé tables are dense
/// m × m matrices, so memory grows quadratically (two 800 MB tables here).
pub const MAX_TOURNAMENT_CANDIDATES: usize = 10_000;

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    size: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(size: usize) -> Self {
        SquareMatrix {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }
}

/// How Scheffé sets are represented for a candidate class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheffeEngine {
    /// Univariate Gaussians: closed-form crossings, exact masses.
    Gaussian1d,
    /// Univariate normal mixtures: crossings located on a shared grid by
    /// linear interpolation; masses of the resulting intervals are exact.
    Mixture1d,
    /// Finite domain: sets are bit masks, masses exact.
    Finite,
    /// Anything else: candidate masses by sampling from each candidate.
    MonteCarlo,
}

#[derive(Debug, Clone)]
enum Kernel {
    Gaussian1d(Vec<(f64, f64)>),
    Mixture1d {
        mixtures: Vec<Vec<(f64, f64, f64)>>,
        boundaries: PairBoundaries,
    },
    Finite {
        masses: Vec<FiniteDist>,
        domain: usize,
    },
    MonteCarlo(Vec<Distribution>),
}

/// Sign changes of p_i − p_j on the shared grid for every pair i < j
/// (row-major pair order), found once at preparation and reused for the
/// candidate masses and every later empirical count.
#[derive(Debug, Clone)]
struct PairBoundaries {
    /// Sign left of the first boundary, per pair.
    first: Vec<i8>,
    /// roots[offsets[p]..offsets[p + 1]] belong to pair p.
    offsets: Vec<usize>,
    roots: Vec<f64>,
    /// Sign to the right of each root.
    signs: Vec<i8>,
}

impl PairBoundaries {
    fn scan(grid: &[f64], densities: &[f64], m: usize) -> Self {
        let g = grid.len();
        let pairs = m * m.saturating_sub(1) / 2;
        let mut b = PairBoundaries {
            first: Vec::with_capacity(pairs),
            offsets: Vec::with_capacity(pairs + 1),
            roots: Vec::new(),
            signs: Vec::new(),
        };
        b.offsets.push(0);
        for i in 0..m {
            for j in i + 1..m {
                let s = scan_pair(
                    grid,
                    &densities[i * g..(i + 1) * g],
                    &densities[j * g..(j + 1) * g],
                    &mut b.roots,
                    &mut b.signs,
                );
                b.first.push(s);
                b.offsets.push(b.roots.len());
            }
        }
        b
    }

    /// Open intervals where the first mixture of the pair wins (`pos`) and
    /// where the second does (`neg`). Grid stretches where the densities tie
    /// (typically both underflowed) belong to neither set.
    fn sets(&self, pair: usize, pos: &mut Vec<(f64, f64)>, neg: &mut Vec<(f64, f64)>) {
        pos.clear();
        neg.clear();
        let range = self.offsets[pair]..self.offsets[pair + 1];
        let mut cur = self.first[pair];
        let mut start = f64::NEG_INFINITY;
        for (&root, &s) in self.roots[range.clone()].iter().zip(&self.signs[range]) {
            match cur {
                1 => pos.push((start, root)),
                -1 => neg.push((start, root)),
                _ => {}
            }
            start = root;
            cur = s;
        }
        match cur {
            1 => pos.push((start, f64::INFINITY)),
            -1 => neg.push((start, f64::INFINITY)),
            _ => {}
        }
    }
}

/// Smallest and largest of `a − b`, in four independent lanes so the
/// reduction pipelines (and vectorizes where the target allows).
#[inline]
fn diff_range(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let d = x[l] - y[l];
            lo[l] = if d < lo[l] { d } else { lo[l] };
            hi[l] = if d > hi[l] { d } else { hi[l] };
        }
    }
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        lo[0] = lo[0].min(d);
        hi[0] = hi[0].max(d);
    }
    (
        lo[0].min(lo[1]).min(lo[2].min(lo[3])),
        hi[0].max(hi[1]).max(hi[2].max(hi[3])),
    )
}

/// Appends the interpolated sign changes of `di − dj` and returns the sign at
/// the first grid point.
fn scan_pair(
    grid: &[f64],
    di: &[f64],
    dj: &[f64],
    roots: &mut Vec<f64>,
    signs: &mut Vec<i8>,
) -> i8 {
    let g = grid.len();
    let sign = |k: usize| (di[k] > dj[k]) as i8 - (di[k] < dj[k]) as i8;
    let first = sign(0);
    let mut cur = first;
    // Crossings are rare, so most 64-point chunks carry one sign. Counting
    // strict wins vectorizes; only mixed chunks are walked point by point.
    for c in (0..g).step_by(64) {
        let hi = (c + 64).min(g);
        let (a, b) = (&di[c..hi], &dj[c..hi]);
        let (lo, hi_d) = diff_range(a, b);
        let uniform = match cur {
            1 => lo > 0.0,
            -1 => hi_d < 0.0,
            _ => lo == 0.0 && hi_d == 0.0,
        };
        if uniform {
            continue;
        }
        for k in c.max(1)..hi {
            let s = sign(k);
            if s == cur {
                continue;
            }
            // boundary between k−1 and k at the interpolated zero
            let (a, b) = (di[k - 1] - dj[k - 1], di[k] - dj[k]);
            let root = if a == b {
                grid[k]
            } else {
                grid[k - 1] + (a / (a - b)).clamp(0.0, 1.0) * (grid[k] - grid[k - 1])
            };
            roots.push(root);
            signs.push(s);
            cur = s;
        }
    }
    first
}

/// Candidate-side half of a Scheffé tournament, computed from candidates
/// alone before any private data is seen.
#[derive(Debug, Clone)]
pub struct Tournament {
    kernel: Kernel,
    candidate_mass: SquareMatrix,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheffeTable {
    pub candidate_mass: SquareMatrix,
    pub empirical_mass: SquareMatrix,
}

impl Tournament {
    pub fn prepare(candidates: &CandidateSet, mc_trials: usize, seed: RngSeed) -> Result<Self> {
        let hyps = candidates.hypotheses();
        let m = hyps.len();
        if m > MAX_TOURNAMENT_CANDIDATES {
            return Err(Error::CapExceeded {
                what: "Scheffé tournament candidates".into(),
                required: m as u128,
                cap: MAX_TOURNAMENT_CANDIDATES as u128,
            });
        }
        let kernel = if let Some(p) = hyps
            .iter()
            .map(Distribution::as_univariate_gaussian)
            .collect::<Option<Vec<_>>>()
        {
            Kernel::Gaussian1d(p)
        } else if let Some(f) = hyps
            .iter()
            .map(|h| h.as_finite().cloned())
            .collect::<Option<Vec<_>>>()
        {
            let domain = f[0].domain_size();
            if let Some(g) = f.iter().find(|g| g.domain_size() != domain) {
                return Err(Error::DimensionMismatch {
                    expected: domain,
                    got: g.domain_size(),
                });
            }
            Kernel::Finite { masses: f, domain }
        } else if let Some(mix) = hyps
            .iter()
            .map(Distribution::as_normal_mixture_1d)
            .collect::<Option<Vec<_>>>()
        {
            let parts: Vec<&[(f64, f64, f64)]> = mix.iter().map(Vec::as_slice).collect();
            let grid = crossing_grid(&parts, MIXTURE_GRID);
            let mut densities = Vec::with_capacity(m * grid.len());
            for mx in &mix {
                densities.extend(grid.iter().map(|&x| mixture_density_1d(mx, x)));
            }
            // densities[i * G + g]
            let boundaries = PairBoundaries::scan(&grid, &densities, m);
            Kernel::Mixture1d {
                mixtures: mix,
                boundaries,
            }
        } else {
            if mc_trials < MIN_SCHEFFE_TRIALS {
                return Err(Error::invalid(
                    "mc_trials",
                    format!("must be at least {MIN_SCHEFFE_TRIALS}"),
                ));
            }
            Kernel::MonteCarlo(hyps.to_vec())
        };
        let mut t = Tournament {
            kernel,
            candidate_mass: SquareMatrix::zeros(m),
            dim: candidates.dim(),
        };
        t.candidate_mass = t.compute_candidate_mass(mc_trials, seed);
        Ok(t)
    }

    pub fn engine(&self) -> ScheffeEngine {
        match self.kernel {
            Kernel::Gaussian1d(_) => ScheffeEngine::Gaussian1d,
            Kernel::Mixture1d { .. } => ScheffeEngine::Mixture1d,
            Kernel::Finite { .. } => ScheffeEngine::Finite,
            Kernel::MonteCarlo(_) => ScheffeEngine::MonteCarlo,
        }
    }

    pub fn len(&self) -> usize {
        self.candidate_mass.size()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn candidate_mass(&self) -> &SquareMatrix {
        &self.candidate_mass
    }

    fn compute_candidate_mass(&self, mc_trials: usize, seed: RngSeed) -> SquareMatrix {
        let m = self.len();
        let mut c = SquareMatrix::zeros(m);
        match &self.kernel {
            Kernel::Gaussian1d(p) => {
                for i in 0..m {
                    let (mi, si) = p[i];
                    for j in i + 1..m {
                        let (mj, sj) = p[j];
                        if p[i] == p[j] {
                            continue;
                        }
                        let a = Crossing::between(mi, si, mj, sj);
                        c.set(i, j, a.mass(mi, si));
                        c.set(j, i, a.complement().mass(mj, sj));
                    }
                }
            }
            Kernel::Mixture1d {
                mixtures,
                boundaries,
                ..
            } => {
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                let mut pair = 0;
                for i in 0..m {
                    for j in i + 1..m {
                        boundaries.sets(pair, &mut pos, &mut neg);
                        pair += 1;
                        c.set(i, j, mixture_mass_1d(&mixtures[i], &pos));
                        c.set(j, i, mixture_mass_1d(&mixtures[j], &neg));
                    }
                }
            }
            Kernel::Finite { masses, domain } => {
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            c.set(
                                i,
                                j,
                                masses[i].mass_of(finite_set(&masses[i], &masses[j], *domain)),
                            );
                        }
                    }
                }
            }
            Kernel::MonteCarlo(hyps) => {
                let mut buf = Vec::with_capacity(self.dim);
                let mut logd = vec![0.0; m];
                for i in 0..m {
                    let mut rng = seed.derive(i as u64).rng();
                    let mut counts = vec![0usize; m];
                    for _ in 0..mc_trials {
                        buf.clear();
                        hyps[i].sample_into(&mut rng, &mut buf);
                        for (l, h) in logd.iter_mut().zip(hyps) {
                            *l = h.log_density_unchecked(&buf);
                        }
                        for j in 0..m {
                            if logd[i] > logd[j] {
                                counts[j] += 1;
                            }
                        }
                    }
                    for j in 0..m {
                        if j != i {
                            c.set(i, j, counts[j] as f64 / mc_trials as f64);
                        }
                    }
                }
            }
        }
        c
    }

    /// Ê[i][j]: fraction of `private` strictly inside A_ij.
    pub fn empirical_mass(&self, private: &Dataset) -> Result<SquareMatrix> {
        if private.is_empty() {
            return Err(Error::Empty("private dataset"));
        }
        if private.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: private.dim(),
            });
        }
        let m = self.len();
        let n = private.len() as f64;
        let mut e = SquareMatrix::zeros(m);
        match &self.kernel {
            Kernel::Gaussian1d(p) => {
                let sorted = sorted_values(private);
                for i in 0..m {
                    let (mi, si) = p[i];
                    for j in i + 1..m {
                        let (mj, sj) = p[j];
                        if p[i] == p[j] {
                            continue;
                        }
                        let a = Crossing::between(mi, si, mj, sj);
                        e.set(i, j, a.count_sorted(&sorted) as f64 / n);
                        e.set(j, i, a.complement().count_sorted(&sorted) as f64 / n);
                    }
                }
            }
            Kernel::Mixture1d { boundaries, .. } => {
                let sorted = sorted_values(private);
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                let mut pair = 0;
                for i in 0..m {
                    for j in i + 1..m {
                        boundaries.sets(pair, &mut pos, &mut neg);
                        pair += 1;
                        e.set(i, j, count_in_intervals(&sorted, &pos) as f64 / n);
                        e.set(j, i, count_in_intervals(&sorted, &neg) as f64 / n);
                    }
                }
            }
            Kernel::Finite { masses, domain } => {
                let hist = histogram(private, *domain)?;
                for i in 0..m {
                    for j in 0..m {
                        if i != j {
                            let set = finite_set(&masses[i], &masses[j], *domain);
                            let count: usize = (0..*domain)
                                .filter(|x| set >> x & 1 == 1)
                                .map(|x| hist[x])
                                .sum();
                            e.set(i, j, count as f64 / n);
                        }
                    }
                }
            }
            Kernel::MonteCarlo(hyps) => {
                let mut counts = vec![0usize; m * m];
                let mut logd = vec![0.0; m];
                for x in private.iter() {
                    for (l, h) in logd.iter_mut().zip(hyps) {
                        *l = h.log_density_unchecked(x);
                    }
                    for i in 0..m {
                        for j in 0..m {
                            if logd[i] > logd[j] {
                                counts[i * m + j] += 1;
                            }
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        e.set(i, j, counts[i * m + j] as f64 / n);
                    }
                }
            }
        }
        Ok(e)
    }

    pub fn table(&self, private: &Dataset) -> Result<ScheffeTable> {
        Ok(ScheffeTable {
            candidate_mass: self.candidate_mass.clone(),
            empirical_mass: self.empirical_mass(private)?,
        })
    }
}

fn sorted_values(data: &Dataset) -> Vec<f64> {
    let mut v = data.values().to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn count_in_intervals(sorted: &[f64], intervals: &[(f64, f64)]) -> usize {
    intervals
        .iter()
        .map(|&(a, b)| {
            let lo = sorted.partition_point(|&x| x <= a);
            let hi = sorted.partition_point(|&x| x < b);
            hi.saturating_sub(lo)
        })
        .sum()
}

/// {x : p(x) > q(x)} as a bit mask.
pub(crate) fn finite_set(p: &FiniteDist, q: &FiniteDist, domain: usize) -> u64 {
    (0..domain)
        .filter(|&x| p.mass(x) > q.mass(x))
        .fold(0u64, |m, x| m | 1 << x)
}

/// Counts of each domain element; values must be integers in range.
pub(crate) fn histogram(data: &Dataset, domain: usize) -> Result<Vec<usize>> {
    if data.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: data.dim(),
        });
    }
    let mut h = vec![0usize; domain];
    for &v in data.values() {
        if !(v >= 0.0 && v.fract() == 0.0 && (v as usize) < domain) {
            return Err(Error::invalid(
                "data",
                format!("{v} is not an element of a domain of size {domain}"),
            ));
        }
        h[v as usize] += 1;
    }
    Ok(h)
}

/// uᵢ = −max_{j≠i} |C[i][j] − Ê[i][j]|; zero for a single candidate.
pub fn utilities(candidate_mass: &SquareMatrix, empirical_mass: &SquareMatrix) -> Result<Vec<f64>> {
    if candidate_mass.size() != empirical_mass.size() {
        return Err(Error::DimensionMismatch {
            expected: candidate_mass.size(),
            got: empirical_mass.size(),
        });
    }
    let m = candidate_mass.size();
    Ok((0..m)
        .map(|i| {
            let dev = candidate_mass
                .row(i)
                .iter()
                .zip(empirical_mass.row(i))
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, (c, e))| (c - e).abs())
                .fold(0.0, f64::max);
            -dev
        })
        .collect())
}
