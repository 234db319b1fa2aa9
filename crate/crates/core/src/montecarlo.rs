//! Monte-Carlo estimation of `E[exp(-γ Σ α_j μ_j)]` from Rayleigh channels.
//!
//! Every sample's randomness derives from `(seed, index)` alone: a ChaCha8
//! generator keyed by the master seed, on stream `index`. Estimators reduce
//! fixed-size blocks in order and then merge block statistics pairwise, so
//! the result does not depend on the number of worker threads.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::wishart::Dimensions;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// fraction of the trace.
pub const JACOBI_REL_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Samples per reduction block.
const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum McError {
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("expected {expected} weights, got {got}")]
    AlphaLength { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `M × N` complex Gaussian channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
    pub seed: u64,
    pub index: u64,
}

impl ChannelSample {
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// The `Y × Y` Gram matrix: `H H†` when `M <= N`, else `H† H`.
    pub fn gram(&self) -> Vec<Complex64> {
        let (outer, inner) = (self.rows.min(self.cols), self.rows.max(self.cols));
        let entry = |i: usize, k: usize| {
            if self.rows <= self.cols {
                self.at(i, k)
            } else {
                self.at(k, i).conj()
            }
        };
        let mut g = vec![Complex64::new(0.0, 0.0); outer * outer];
        for i in 0..outer {
            for j in i..outer {
                let s: Complex64 = (0..inner).map(|k| entry(i, k) * entry(j, k).conj()).sum();
                g[i * outer + j] = s;
                g[j * outer + i] = s.conj();
            }
        }
        g
    }
}

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// i.i.d. circularly-symmetric complex Gaussian entries with unit variance.
pub fn sample_channel(dims: &Dimensions, seed: u64, index: u64) -> ChannelSample {
    let mut rng = sample_rng(seed, index);
    let (rows, cols) = (dims.m(), dims.n());
    let entries = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    ChannelSample { rows, cols, entries, seed, index }
}

/// Eigenvalues of a Hermitian matrix (row-major, `n × n`) by cyclic Jacobi
/// rotations, sorted descending. Only the upper triangle is trusted.
pub fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Result<Vec<f64>, McError> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            a[j * n + i] = a[i * n + j].conj();
        }
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i].re.abs()).sum();
    let threshold = JACOBI_REL_TOL * trace;
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a[i * n + j].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(McError::ConvergenceFailure(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase rotation on column/row q makes a_pq real and positive.
                let phase = apq / r;
                for k in 0..n {
                    a[k * n + q] *= phase.conj();
                    a[q * n + k] *= phase;
                }
                let (app, aqq) = (a[p * n + p].re, a[q * n + q].re);
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp * c - akq * s;
                    let new_kq = akp * s + akq * c;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp.conj();
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Ordered eigenvalues `μ_1 > … > μ_Y` of the Wishart matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSample {
    pub mu: Vec<f64>,
}

pub fn ordered_eigenvalues(h: &ChannelSample) -> Result<EigenSample, McError> {
    let y = h.rows.min(h.cols);
    Ok(EigenSample { mu: hermitian_eigenvalues(&h.gram(), y)? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub gamma: f64,
}

/// Running mean and centred second moment; merges are Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let mean = a.mean + delta * (b.n as f64 / n as f64);
        let m2 = a.m2 + b.m2 + delta * delta * (a.n as f64 * b.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }

    fn estimate(&self, gamma: f64) -> McEstimate {
        let stderr = if self.n > 1 { (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt() } else { 0.0 };
        McEstimate { mean: self.mean, stderr, n: self.n, gamma }
    }
}

fn pairwise_merge(blocks: &[Moments]) -> Moments {
    match blocks.len() {
        0 => Moments::default(),
        1 => blocks[0],
        len => {
            let (l, r) = blocks.split_at(len / 2);
            Moments::merge(pairwise_merge(l), pairwise_merge(r))
        }
    }
}

/// Estimates for every `(alpha, gamma)` pair from one shared set of `n`
/// channel samples. Output is indexed `[alpha][gamma]`.
pub fn estimate_pep_grid(
    dims: &Dimensions,
    alphas: &[Vec<f64>],
    gammas: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<Vec<McEstimate>>, McError> {
    if n == 0 {
        return Err(McError::InvalidArgument("sample count must be at least 1".into()));
    }
    for a in alphas {
        if a.len() != dims.y() {
            return Err(McError::AlphaLength { expected: dims.y(), got: a.len() });
        }
    }
    if gammas.iter().any(|g| g.is_nan() || *g < 0.0) {
        return Err(McError::InvalidArgument("gamma must be nonnegative".into()));
    }
    let slots = alphas.len() * gammas.len();
    let blocks = n.div_ceil(BLOCK as u64);
    let per_block: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Moments::default(); slots];
            let end = ((b + 1) * BLOCK as u64).min(n);
            for index in b * BLOCK as u64..end {
                let eig = ordered_eigenvalues(&sample_channel(dims, seed, index))?;
                for (ai, a) in alphas.iter().enumerate() {
                    let weighted: f64 = a.iter().zip(&eig.mu).map(|(w, m)| w * m).sum();
                    for (gi, &g) in gammas.iter().enumerate() {
                        acc[ai * gammas.len() + gi].push((-g * weighted).exp());
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, McError>>()?;

    let mut out = Vec::with_capacity(alphas.len());
    for ai in 0..alphas.len() {
        let row = gammas
            .iter()
            .enumerate()
            .map(|(gi, &g)| {
                let slot = ai * gammas.len() + gi;
                let column: Vec<Moments> = per_block.iter().map(|blk| blk[slot]).collect();
                pairwise_merge(&column).estimate(g)
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Sample-mean estimate of `E[exp(-γ Σ α_j μ_j)]`.
pub fn estimate_pep(dims: &Dimensions, alpha: &[f64], gamma: f64, n: u64, seed: u64) -> Result<McEstimate, McError> {
    Ok(estimate_pep_grid(dims, &[alpha.to_vec()], &[gamma], n, seed)?[0][0])
}

/// Density histogram of one ordered eigenvalue over `[0, max sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub index: usize,
    pub upper: f64,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        self.upper / self.bins() as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (bin as f64 * w, (bin + 1) as f64 * w)
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.width()
    }

    pub fn density(&self, bin: usize) -> f64 {
        self.counts[bin] as f64 / (self.n as f64 * self.width())
    }

    /// Binomial standard error of the bin density.
    pub fn density_stderr(&self, bin: usize) -> f64 {
        let p = self.counts[bin] as f64 / self.n as f64;
        (p * (1.0 - p) / self.n as f64).sqrt() / self.width()
    }

    pub fn integral(&self) -> f64 {
        (0..self.bins()).map(|b| self.density(b) * self.width()).sum()
    }

    /// Bins where the empirical density exceeds `bound` at the midpoint by
    /// more than `sigmas` standard errors plus the bound's own variation over
    /// the bin. Bins with fewer than `min_count` observations are skipped.
    pub fn dominance_violations(&self, bound: impl Fn(f64) -> f64, sigmas: f64, min_count: u64) -> Vec<BinViolation> {
        (0..self.bins())
            .filter(|&b| self.counts[b] >= min_count)
            .filter_map(|b| {
                let (lo, hi) = self.edges(b);
                let mid = bound(self.midpoint(b));
                let in_bin_max = (0..=8).map(|i| bound(lo + (hi - lo) * i as f64 / 8.0)).fold(mid, f64::max);
                let allowed = mid + (in_bin_max - mid) + sigmas * self.density_stderr(b);
                let density = self.density(b);
                (density > allowed).then_some(BinViolation { bin: b, density, allowed })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinViolation {
    pub bin: usize,
    pub density: f64,
    pub allowed: f64,
}

/// Histogram of `μ_index` from `n` channel samples.
pub fn marginal_histogram(
    dims: &Dimensions,
    index: usize,
    bins: usize,
    n: u64,
    seed: u64,
) -> Result<Histogram, McError> {
    if bins < 10 {
        return Err(McError::InvalidArgument("at least 10 bins are required".into()));
    }
    if n < 100_000 {
        return Err(McError::InvalidArgument("at least 1e5 samples are required".into()));
    }
    if index == 0 || index > dims.y() {
        return Err(McError::InvalidArgument(format!("eigenvalue index {index} outside 1..={}", dims.y())));
    }
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| ordered_eigenvalues(&sample_channel(dims, seed, i)).map(|e| e.mu[index - 1]))
        .collect::<Result<_, _>>()?;
    let upper = values.iter().copied().fold(0.0, f64::max);
    let mut counts = vec![0u64; bins];
    for v in values {
        let b = ((v / upper * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { index, upper, counts, n })
}
