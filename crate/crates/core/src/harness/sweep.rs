use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{gap, hausdorff, Subspace};
use crate::linalg::{hcat, CMat};
use crate::maps::CircleMap;
use crate::spectral::{triple_norm, SaksStructure};
use crate::transfer::{assemble, fejer_defect};

use super::config::{derive_seed, ExperimentConfig};
use super::run::{analyze, run_reference, Analysis, Metadata, Reference};

/// One point of a sweep, compared against the reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// `ε` or the truncation order `n`.
    pub axis: f64,
    /// `|γ_i - γ_i^ref|` for the compared leading directions.
    pub gamma_diff: Vec<f64>,
    /// Combined standard error of each compared pair of exponents.
    pub gamma_noise: Vec<f64>,
    /// Max over anchors of the triple norm of `Π_i - Π_i^ref`, per block.
    pub proj_tnorm_diff: Vec<f64>,
    /// Max over splits and anchors of the Hausdorff distance between slow spaces.
    pub slow_gap: f64,
    pub fast_gap: f64,
    /// Certificate of this run.
    pub theta: f64,
    pub eta: f64,
    pub pass: bool,
    pub top: f64,
    /// `triple_norm(L_T - L_S) / d_{C^{k-1}}(S, T)`, max over fibers
    /// (perturbation sweeps only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lipschitz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ck_distance: Option<f64>,
    /// Why the point carries no measurements.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub skipped: Option<String>,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl SweepRecord {
    fn skipped(axis: f64, reason: String, n_gamma: usize, n_proj: usize, wall_ms: f64) -> Self {
        SweepRecord {
            axis,
            gamma_diff: vec![f64::NAN; n_gamma],
            gamma_noise: vec![f64::NAN; n_gamma],
            proj_tnorm_diff: vec![f64::NAN; n_proj],
            slow_gap: f64::NAN,
            fast_gap: f64::NAN,
            theta: f64::NAN,
            eta: f64::NAN,
            pass: false,
            top: f64::NAN,
            lipschitz: None,
            ck_distance: None,
            skipped: Some(reason),
            wall_ms,
        }
    }

    pub fn max_gamma_diff(&self) -> f64 {
        self.gamma_diff.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_proj_diff(&self) -> f64 {
        self.proj_tnorm_diff.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDigest {
    pub order: usize,
    pub top: f64,
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub dims: Vec<usize>,
    pub theta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub eta: f64,
    pub pass: bool,
    pub anchors: usize,
}

impl ReferenceDigest {
    fn of(a: &Analysis) -> Self {
        ReferenceDigest {
            order: a.order,
            top: a.spectrum.top(),
            exponents: a.spectrum.exponents.clone(),
            multiplicities: a.spectrum.multiplicities.clone(),
            dims: a.dims.clone(),
            theta: a.certificate.theta,
            c: a.certificate.c,
            eta: a.certificate.eta,
            pass: a.certificate.pass,
            anchors: a.splittings.first().map_or(0, |s| s.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub spearman_gamma: f64,
    pub spearman_proj: f64,
    /// `max / min` of the Lipschitz ratios across the measured points.
    pub lipschitz_band: f64,
    pub lipschitz_max: f64,
    pub measured: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSweep {
    pub metadata: Metadata,
    pub reference: ReferenceDigest,
    pub records: Vec<SweepRecord>,
    pub summary: PerturbationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectStep {
    pub n: usize,
    pub defect: f64,
    /// `defect(2n) / defect(n)` when `2n` is also swept.
    pub doubling_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerSummary {
    /// Differences are against the highest order run, not the operator.
    pub comparison: String,
    /// Every step satisfies `diff(n') ≤ diff(n) + 2 noise`.
    pub cauchy_decreasing: bool,
    pub defects: Vec<DefectStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FejerSweep {
    pub metadata: Metadata,
    pub reference: ReferenceDigest,
    pub records: Vec<SweepRecord>,
    pub summary: FejerSummary,
}

fn compared(cfg: &ExperimentConfig, reference: &Analysis) -> usize {
    let default = reference.dims.iter().copied().max().unwrap_or(0) + 1;
    cfg.sweep.compare.unwrap_or(default).min(reference.spectrum.raw.len())
}

fn exponent_diffs(run: &Analysis, reference: &Analysis, count: usize) -> (Vec<f64>, Vec<f64>) {
    (0..count)
        .map(|i| {
            let (a, b) = (run.spectrum.gamma(i), reference.spectrum.gamma(i));
            let diff = if a == b { 0.0 } else { (a - b).abs() };
            let noise = run.spectrum.raw_stderr.get(i).copied().unwrap_or(0.0).hypot(reference.spectrum.raw_stderr.get(i).copied().unwrap_or(0.0));
            (diff, noise)
        })
        .unzip()
}

/// Embed order-`n` Fourier matrices into a larger order by zero padding.
pub fn pad_matrix(m: &CMat, dim: usize) -> Result<CMat> {
    let small = m.nrows();
    if dim < small || (dim - small) % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: small, found: dim });
    }
    let off = (dim - small) / 2;
    let mut out = CMat::zeros(dim, dim);
    out.view_mut((off, off), (small, small)).copy_from(m);
    Ok(out)
}

/// Slow space of a lower order run inside order `dim`: the padded space plus
/// every frequency the lower order does not resolve.
fn embed_slow(s: &Subspace, dim: usize) -> Result<Subspace> {
    let small = s.ambient();
    if small == dim {
        return Ok(s.clone());
    }
    let off = (dim - small) / 2;
    let extra: Vec<usize> = (0..off).chain(off + small..dim).collect();
    Subspace::new(&hcat(s.zero_padded(dim)?.basis(), Subspace::coordinate(dim, &extra)?.basis()))
}

/// Differences of splittings and projections between `run` and `reference`
/// (both over the same anchors); `run` may be of lower order and is padded.
fn splitting_diffs(run: &Analysis, reference: &Analysis, saks: &SaksStructure) -> Result<(Vec<f64>, f64, f64)> {
    let dim = reference.cocycle.dim();
    let pad = |s: &Subspace| s.zero_padded(dim);
    let mut slow_gap: f64 = 0.0;
    let mut fast_gap: f64 = 0.0;
    for (mine, theirs) in run.splittings.iter().zip(&reference.splittings) {
        for (a, b) in mine.iter().zip(theirs) {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: b.dim(), found: a.dim() });
            }
            fast_gap = fast_gap.max(gap(&pad(&a.fast)?, &b.fast).max(gap(&b.fast, &pad(&a.fast)?)));
            if let (Some(x), Some(y)) = (&a.slow, &b.slow) {
                slow_gap = slow_gap.max(hausdorff(&embed_slow(x, dim)?, y));
            }
        }
    }
    let proj = run
        .projections
        .iter()
        .zip(&reference.projections)
        .map(|(mine, theirs)| {
            mine.iter().zip(theirs).try_fold(0.0f64, |acc, (p, q)| Ok(acc.max(triple_norm(&(pad_matrix(p, dim)? - q), saks)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((proj, slow_gap, fast_gap))
}

fn measured(axis: f64, run: &Analysis, reference: &Analysis, count: usize, saks: &SaksStructure) -> Result<SweepRecord> {
    let (gamma_diff, gamma_noise) = exponent_diffs(run, reference, count);
    let (proj_tnorm_diff, slow_gap, fast_gap) = splitting_diffs(run, reference, saks)?;
    Ok(SweepRecord {
        axis,
        gamma_diff,
        gamma_noise,
        proj_tnorm_diff,
        slow_gap,
        fast_gap,
        theta: run.certificate.theta,
        eta: run.certificate.eta,
        pass: run.certificate.pass,
        top: run.spectrum.top(),
        lipschitz: None,
        ck_distance: None,
        skipped: None,
        wall_ms: 0.0,
    })
}

/// Perturb every fiber map by `eps` (same direction for every `ε`).
pub fn perturbed_maps(cfg: &ExperimentConfig, eps: f64) -> Result<Vec<CircleMap>> {
    cfg.maps
        .iter()
        .enumerate()
        .map(|(i, m)| m.perturb(eps, cfg.sweep.mode, derive_seed(cfg.seed, "perturb", i as u64), &cfg.ly_params))
        .collect()
}

/// Largest `triple_norm(L_T - L_S) / d_{C^{k-1}}(S, T)` over the fibers, and
/// the largest distance; unweighted matrices at the reference order.
fn lipschitz_ratio(cfg: &ExperimentConfig, perturbed: &[CircleMap], saks: &SaksStructure) -> Result<(f64, f64)> {
    let mut ratio: f64 = 0.0;
    let mut dist: f64 = 0.0;
    for (s, t) in cfg.maps.iter().zip(perturbed) {
        let d = s.ck_distance(t, saks.k() - 1, s.default_grid().max(t.default_grid()));
        if d == 0.0 {
            continue;
        }
        let ls = assemble(s, cfg.order, cfg.quadrature)?.into_matrix();
        let lt = assemble(t, cfg.order, cfg.quadrature)?.into_matrix();
        ratio = ratio.max(triple_norm(&(lt - ls), saks)? / d);
        dist = dist.max(d);
    }
    Ok((ratio, dist))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return f64::NAN;
    }
    cov / (vx * vy).sqrt()
}

/// Fiber-wise perturbation sweep against a fresh reference run.
pub fn sweep_perturbation(cfg: &ExperimentConfig, eps: &[f64]) -> Result<PerturbationSweep> {
    let reference = run_reference(cfg)?;
    sweep_perturbation_from(&reference, eps)
}

/// Fiber-wise perturbation sweep: every map is perturbed, the cocycle is
/// rebuilt on the same path and charted against the reference frames.
pub fn sweep_perturbation_from(reference: &Reference, eps: &[f64]) -> Result<PerturbationSweep> {
    let cfg = &reference.config;
    if eps.is_empty() {
        return Err(Error::Config("perturbation sweep needs at least one eps".into()));
    }
    if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::Config(format!("eps must be finite and >= 0, got {bad}")));
    }
    let base = &reference.analysis;
    let saks = base.saks(cfg);
    let count = compared(cfg, base);
    let n_proj = base.dims.len();
    let records = eps
        .par_iter()
        .map(|&e| {
            let clock = Instant::now();
            let maps = match perturbed_maps(cfg, e) {
                Ok(m) => m,
                Err(err @ Error::PerturbationLeavesClass { .. }) => {
                    return Ok(SweepRecord::skipped(e, err.to_string(), count, n_proj, clock.elapsed().as_secs_f64() * 1e3))
                }
                Err(err) => return Err(err),
            };
            let run = analyze(cfg, &maps, cfg.order, &reference.path, Some(base))?;
            let mut rec = measured(e, &run, base, count, &saks)?;
            let (ratio, dist) = lipschitz_ratio(cfg, &maps, &saks)?;
            rec.lipschitz = (dist > 0.0).then_some(ratio);
            rec.ck_distance = Some(dist);
            rec.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;

    let live: Vec<&SweepRecord> = records.iter().filter(|r| r.skipped.is_none()).collect();
    let axis: Vec<f64> = live.iter().map(|r| r.axis).collect();
    let g: Vec<f64> = live.iter().map(|r| r.max_gamma_diff()).collect();
    let p: Vec<f64> = live.iter().map(|r| r.max_proj_diff()).collect();
    let ratios: Vec<f64> = live.iter().filter_map(|r| r.lipschitz).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let summary = PerturbationSummary {
        spearman_gamma: spearman(&axis, &g),
        spearman_proj: spearman(&axis, &p),
        lipschitz_band: if ratios.is_empty() || lo == 0.0 { f64::NAN } else { hi / lo },
        lipschitz_max: hi,
        measured: live.len(),
        skipped: records.len() - live.len(),
    };
    Ok(PerturbationSweep {
        metadata: Metadata::new("sweep-perturb", cfg),
        reference: ReferenceDigest::of(base),
        records,
        summary,
    })
}

/// Fejér-order sweep: each order's results are zero padded into the
/// reference order `n_ref` and compared there.
pub fn sweep_fejer(cfg: &ExperimentConfig, orders: &[usize], n_ref: usize) -> Result<FejerSweep> {
    if orders.is_empty() {
        return Err(Error::Config("Fejer sweep needs at least one order".into()));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) || orders[orders.len() - 1] > n_ref || orders[0] == 0 {
        return Err(Error::Config(format!("orders must be strictly increasing in [1, {n_ref}], got {orders:?}")));
    }
    let ref_cfg = ExperimentConfig { order: n_ref, ..cfg.clone() };
    let reference = run_reference(&ref_cfg)?;
    let base = &reference.analysis;
    let saks = base.saks(cfg);
    let count = compared(cfg, base);
    let records = orders
        .par_iter()
        .map(|&n| {
            let clock = Instant::now();
            let mut rec = if n == n_ref {
                measured(n as f64, base, base, count, &saks)?
            } else {
                let run_cfg = ExperimentConfig { order: n, ..cfg.clone() };
                let run = analyze(&run_cfg, &cfg.maps, n, &reference.path, None)?;
                if run.dims != base.dims {
                    SweepRecord::skipped(
                        n as f64,
                        format!("split dimensions {:?} differ from the reference {:?}", run.dims, base.dims),
                        count,
                        base.dims.len(),
                        0.0,
                    )
                } else {
                    measured(n as f64, &run, base, count, &saks)?
                }
            };
            rec.wall_ms = clock.elapsed().as_secs_f64() * 1e3;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;

    let live: Vec<&SweepRecord> = records.iter().filter(|r| r.skipped.is_none()).collect();
    let cauchy_decreasing = live.windows(2).all(|w| {
        w[1].gamma_diff.iter().zip(&w[0].gamma_diff).zip(&w[1].gamma_noise).all(|((next, prev), noise)| *next <= prev + 2.0 * noise)
    });
    let defects = orders
        .iter()
        .map(|&n| {
            let defect = fejer_defect(n, cfg.ly_params.k);
            let doubling_ratio = orders.contains(&(2 * n)).then(|| fejer_defect(2 * n, cfg.ly_params.k) / defect);
            DefectStep { n, defect, doubling_ratio }
        })
        .collect();
    Ok(FejerSweep {
        metadata: Metadata::new("sweep-fejer", &ref_cfg),
        reference: ReferenceDigest::of(base),
        records,
        summary: FejerSummary { comparison: "self-convergence".into(), cauchy_decreasing, defects },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[10.0, 20.0, 30.0, 40.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        // ties get average ranks: ranks (1, 2.5, 2.5, 4)
        let r = spearman(&x, &[1.0, 2.0, 2.0, 3.0]);
        assert!((r - 4.5 / (5.0f64 * 4.5).sqrt()).abs() < 1e-12);
        assert!(spearman(&x, &[1.0; 4]).is_nan());
    }

    #[test]
    fn padding_keeps_frequencies() {
        let m = crate::linalg::random_matrix(3, 3, 4);
        let p = pad_matrix(&m, 7).unwrap();
        assert_eq!(p[(3, 3)], m[(1, 1)]);
        assert_eq!(p[(2, 4)], m[(0, 2)]);
        assert_eq!(p[(0, 0)], crate::linalg::C64::new(0.0, 0.0));
        assert!(pad_matrix(&m, 6).is_err());
    }
}
