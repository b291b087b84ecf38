use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, random_matrix, thin_qr};
use crate::transfer::Cocycle;

/// Parameters of the discrete-QR exponent computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QrOptions {
    /// Averaging horizon `N`.
    pub steps: usize,
    /// Number of leading exponents to report.
    pub d_max: usize,
    /// Merge tolerance; `None` means `5 / sqrt(N)`.
    pub tau: Option<f64>,
    /// Steps run before `start` to align the frame; they are not averaged.
    #[serde(default)]
    pub warmup: usize,
    /// First averaged time index.
    #[serde(default)]
    pub start: i64,
    /// Number of batches for the batch-means standard error.
    #[serde(default = "default_batches")]
    pub batches: usize,
    /// Seed of the random starting frame. Coordinate frames can sit inside an
    /// invariant subspace (zero-mean densities are one) and miss exponents.
    #[serde(default)]
    pub seed: u64,
}

fn default_batches() -> usize {
    20
}

impl QrOptions {
    pub fn new(steps: usize, d_max: usize) -> Self {
        Self { steps, d_max, tau: None, warmup: 0, start: 0, batches: default_batches(), seed: 0 }
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(5.0 / (self.steps as f64).sqrt())
    }
}

/// Leading Lyapunov exponents, merged into blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Block exponents, strictly decreasing.
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Batch-means standard error of each block exponent.
    pub stderr: Vec<f64>,
    /// Unmerged exponents (one per tracked direction, non-increasing).
    pub raw: Vec<f64>,
    pub raw_stderr: Vec<f64>,
    /// Bound for everything below the reported directions, when the ambient
    /// dimension leaves room for one more tracked direction.
    pub tail: Option<f64>,
    pub tau: f64,
    #[serde(rename = "N")]
    pub horizon: usize,
}

impl LyapunovSpectrum {
    pub fn top(&self) -> f64 {
        self.exponents[0]
    }

    /// Exponent of the `i`-th direction counted with multiplicity (0-based);
    /// beyond the tracked directions the tail bound, or `-inf`.
    pub fn gamma(&self, i: usize) -> f64 {
        self.raw.get(i).copied().or(self.tail).unwrap_or(f64::NEG_INFINITY)
    }

    /// Cumulative multiplicities `d_1, d_1 + d_2, …`.
    pub fn block_dims(&self) -> Vec<usize> {
        self.multiplicities
            .iter()
            .scan(0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// Gap at a split after `d` directions: `γ_{d-1} - γ_d`.
    pub fn gap_at(&self, d: usize) -> f64 {
        if d == 0 {
            return f64::INFINITY;
        }
        let (hi, lo) = (self.gamma(d - 1), self.gamma(d));
        if lo == f64::NEG_INFINITY {
            if hi == f64::NEG_INFINITY {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            hi - lo
        }
    }
}

/// Lyapunov exponents by discrete QR: the orthonormal frame is pushed through
/// the cocycle and re-orthonormalised every step; the logarithms of the
/// diagonal of `R` are averaged over `[start, start + steps)`.
pub fn qr_spectrum(cocycle: &Cocycle, opts: &QrOptions) -> Result<LyapunovSpectrum> {
    if opts.steps == 0 {
        return Err(Error::InvalidArgument("QR horizon must be >= 1".into()));
    }
    let dim = cocycle.dim();
    if opts.d_max == 0 || opts.d_max > dim {
        return Err(Error::InvalidArgument(format!("d_max must lie in [1, {dim}], got {}", opts.d_max)));
    }
    let tau = opts.tau();
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("merge tolerance must be >= 0, got {tau}")));
    }
    let batches = opts.batches.clamp(1, opts.steps);
    let first = opts.start - opts.warmup as i64;
    let last = opts.start + opts.steps as i64 - 1;
    let path = cocycle.path();
    path.index(first)?;
    path.index(last)?;

    let cols = (opts.d_max + 1).min(dim);
    let mut q = orthonormalize(&random_matrix(dim, cols, opts.seed))?;
    let mut sums = vec![0.0; cols];
    let mut batch_sums = vec![vec![0.0; cols]; batches];
    for t in first..=last {
        let y = cocycle.matrix(t)? * &q;
        let (q_new, r, _) = thin_qr(&y);
        q = q_new;
        if t < opts.start {
            continue;
        }
        let step = (t - opts.start) as usize;
        let batch = step * batches / opts.steps;
        for i in 0..cols {
            let v = r[(i, i)].norm().ln();
            if v.is_nan() {
                return Err(Error::DegenerateCocycle(format!("NaN in QR step at t = {t}")));
            }
            sums[i] += v;
            batch_sums[batch][i] += v;
        }
    }
    let n = opts.steps as f64;
    let mut raw: Vec<f64> = sums.iter().map(|s| s / n).collect();
    if raw.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::DegenerateCocycle("non-finite exponent".into()));
    }
    let batch_len: Vec<f64> =
        (0..batches).map(|b| ((b + 1) * opts.steps).div_ceil(batches) as f64 - (b * opts.steps).div_ceil(batches) as f64).collect();
    let stderr_of = |idx: &[usize]| -> f64 {
        let means: Vec<f64> = (0..batches)
            .map(|b| idx.iter().map(|&i| batch_sums[b][i]).sum::<f64>() / (idx.len() as f64 * batch_len[b]))
            .collect();
        batch_stderr(&means)
    };
    let raw_stderr_all: Vec<f64> = (0..cols).map(|i| stderr_of(&[i])).collect();
    // QR diagonals are ordered only asymptotically; sort the averages.
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let tail = if cols > opts.d_max { Some(sorted[opts.d_max]) } else { None };
    raw = sorted[..opts.d_max].to_vec();
    let kept: Vec<usize> = order[..opts.d_max].to_vec();
    let raw_stderr = kept.iter().map(|&i| raw_stderr_all[i]).collect();

    let mut exponents = Vec::new();
    let mut multiplicities = Vec::new();
    let mut stderr = Vec::new();
    let mut group: Vec<usize> = Vec::new();
    let mut flush = |group: &mut Vec<usize>| {
        if group.is_empty() {
            return;
        }
        let vals: Vec<f64> = group.iter().map(|&g| raw[g]).collect();
        let mean = if vals.iter().all(|v| *v == f64::NEG_INFINITY) {
            f64::NEG_INFINITY
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let idx: Vec<usize> = group.iter().map(|&g| kept[g]).collect();
        exponents.push(mean);
        multiplicities.push(group.len());
        stderr.push(if mean.is_finite() { stderr_of(&idx) } else { 0.0 });
        group.clear();
    };
    for i in 0..raw.len() {
        if let Some(&prev) = group.last() {
            let same = (raw[prev] == raw[i]) || raw[prev] - raw[i] <= tau;
            if !same {
                flush(&mut group);
            }
        }
        group.push(i);
    }
    flush(&mut group);

    Ok(LyapunovSpectrum { exponents, multiplicities, stderr, raw, raw_stderr, tail, tau, horizon: opts.steps })
}

fn batch_stderr(means: &[f64]) -> f64 {
    let b = means.len();
    if b < 2 || means.iter().any(|m| !m.is_finite()) {
        return 0.0;
    }
    let mu = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}
