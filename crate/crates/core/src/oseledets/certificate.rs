use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::random_matrix;
use crate::transfer::Cocycle;

use super::det::restricted_growth;
use super::{LyapunovSpectrum, SplittingState};

/// Empirical constants of a hyperbolic splitting: projections bounded by
/// `Θ`, and for all sampled times and `n ≤ H`
/// `‖Q^n|_V‖ ≤ C e^{n(λ_{i+1}+η)}`, `‖(Q^n|_U)^{-1}‖ ≤ C e^{-n(λ_i-η)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityCertificate {
    pub theta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub eta: f64,
    pub horizon: usize,
    pub samples: usize,
    /// Smallest spectral gap across the certified splits.
    pub min_gap: f64,
    pub pass: bool,
}

/// Certificate for one or more splits; it passes when every gap exceeds the
/// spectrum's merge tolerance and `η` is below half the smallest gap.
///
/// `boundaries[b]` holds the splitting
/// states (same fast dimension) at the sampled times; the exponents on both
/// sides of each split are read from `spectrum`.
///
/// `η` is the largest deviation of the horizon-`H` growth rates from the
/// exponents; `C` is then the smallest constant making both inequalities
/// hold for every `n ≤ H`.
pub fn hyperbolicity_certificate(
    cocycle: &Cocycle,
    spectrum: &LyapunovSpectrum,
    boundaries: &[Vec<SplittingState>],
    horizon: usize,
    warmup: usize,
) -> Result<HyperbolicityCertificate> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("certificate horizon must be >= 1".into()));
    }
    let mut theta: f64 = 1.0;
    let mut eta: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    let mut samples = 0;
    // per boundary and sample: (λ_i, λ_{i+1}, log-norm curve on V, log-conorm curve on U)
    let mut curves: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for states in boundaries {
        for s in states {
            let Some(slow) = &s.slow else { continue };
            let d = s.dim();
            let (upper, lower) = (spectrum.gamma(d - 1), spectrum.gamma(d));
            min_gap = min_gap.min(spectrum.gap_at(d));
            theta = theta.max(s.proj.norm()).max(s.proj.complementary().norm());
            let adjoint = adjoint_fast_spaces(cocycle, s.t, d, horizon, warmup)?;
            let mut on_v = vec![0.0; horizon];
            restricted_growth(cocycle, s.t, slow, horizon, Some(&adjoint), |n, hi, _| on_v[n - 1] = hi)?;
            let mut on_u = vec![0.0; horizon];
            restricted_growth(cocycle, s.t, &s.fast, horizon, None, |n, _, lo| on_u[n - 1] = lo)?;
            let h = horizon as f64;
            if lower > f64::NEG_INFINITY {
                eta = eta.max(on_v[horizon - 1] / h - lower);
            }
            eta = eta.max(upper - on_u[horizon - 1] / h);
            curves.push((upper, lower, on_v, on_u));
            samples += 1;
        }
    }
    let mut log_c: f64 = 0.0;
    for (upper, lower, on_v, on_u) in &curves {
        for n in 1..=horizon {
            let nf = n as f64;
            if *lower > f64::NEG_INFINITY {
                log_c = log_c.max(on_v[n - 1] - nf * (lower + eta));
            }
            log_c = log_c.max(nf * (upper - eta) - on_u[n - 1]);
        }
    }
    let c = log_c.exp();
    let finite = theta.is_finite() && eta.is_finite() && c.is_finite();
    // Gaps inside the merge tolerance are not resolved by the spectrum.
    let pass = samples > 0 && finite && min_gap > spectrum.tau && eta < 0.5 * min_gap;
    Ok(HyperbolicityCertificate { theta, c, eta, horizon, samples, min_gap, pass })
}

/// Top-`d` spaces of the adjoint cocycle at `t, …, t + horizon`, from a
/// backward sweep started `warmup` steps beyond the horizon. Their
/// annihilators are the slow spaces along the orbit.
fn adjoint_fast_spaces(cocycle: &Cocycle, t: i64, d: usize, horizon: usize, warmup: usize) -> Result<Vec<Subspace>> {
    let end = t + (horizon + warmup) as i64;
    let seed = (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ d as u64;
    let mut h = Subspace::new(&random_matrix(cocycle.dim(), d, seed))?;
    let mut out = vec![h.clone(); horizon + 1];
    for s in (t..end).rev() {
        h = h.image(&cocycle.matrix(s)?.adjoint())?;
        if s <= t + horizon as i64 {
            out[(s - t) as usize] = h.clone();
        }
    }
    Ok(out)
}
