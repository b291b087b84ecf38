use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::{max_abs, singular_values, thin_qr, CMat, C64};
use crate::transfer::Cocycle;

/// One sampled time of [`exponent_via_det`], all rates per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSample {
    pub t: i64,
    /// `log det(Q^n|E(t)) / (n d)`.
    pub det_rate: f64,
    /// `log ‖Q^n|E(t)‖ / n`.
    pub norm_rate: f64,
    /// `log m(Q^n|E(t)) / n` (co-norm).
    pub conorm_rate: f64,
    /// Distance the volume rate was moved to land inside the bracket.
    pub clamped: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetEstimate {
    pub exponent: f64,
    pub stderr: f64,
    pub norm: f64,
    pub conorm: f64,
    pub n: usize,
    pub samples: Vec<DetSample>,
}

/// Images `E(t0 + j·stride) = Q^{j·stride}(t0) E` for `j < count`.
pub fn equivariant_family(cocycle: &Cocycle, e: &Subspace, t0: i64, stride: usize, count: usize) -> Result<Vec<(i64, Subspace)>> {
    let mut out = Vec::with_capacity(count);
    let mut cur = e.clone();
    for j in 0..count {
        let t = t0 + (j * stride) as i64;
        if j > 0 {
            let mut b = cur.basis().clone();
            for s in t - stride as i64..t {
                b = thin_qr(&(cocycle.matrix(s)? * b)).0;
            }
            cur = Subspace::new(&b)?;
        }
        out.push((t, cur.clone()));
    }
    Ok(out)
}

/// Growth of `Q^n(t)` restricted to `E`: returns `Σ log|r_ii|` and reports
/// `(step, log σ_max, log σ_min)` after every step of a re-orthonormalised
/// push of the basis. With `annihilators`, the pushed basis at step `j` is
/// projected onto `annihilators[j]^⊥` (the slow space at that time), which
/// keeps rounding errors from leaking into faster directions.
pub(crate) fn restricted_growth(
    cocycle: &Cocycle,
    t: i64,
    e: &Subspace,
    n: usize,
    annihilators: Option<&[Subspace]>,
    mut visit: impl FnMut(usize, f64, f64),
) -> Result<f64> {
    let d = e.dim();
    let mut b = e.basis().clone();
    // acc = R_n ⋯ R_1 and inv = R_1^{-1} ⋯ R_n^{-1}, each rescaled to unit
    // max entry with the logarithm of the scale kept aside. Accumulating the
    // inverse factor by factor keeps σ_min accurate on strongly graded blocks
    // where inverting acc itself would overflow.
    let mut acc = CMat::identity(d, d);
    let mut inv = CMat::identity(d, d);
    let (mut scale, mut inv_scale) = (0.0, 0.0);
    let mut log_det = 0.0;
    let rescale = |m: &mut CMat, s: &mut f64| {
        let big = max_abs(m);
        if big > 0.0 && big.is_finite() {
            *m /= C64::new(big, 0.0);
            *s += big.ln();
        }
    };
    for step in 0..n {
        let mut y = cocycle.matrix(t + step as i64)? * b;
        if let Some(h) = annihilators.and_then(|a| a.get(step + 1)) {
            y -= h.basis() * (h.basis().adjoint() * &y);
        }
        let (q, r, _) = thin_qr(&y);
        log_det += (0..d).map(|i| r[(i, i)].norm().ln()).sum::<f64>();
        b = q;
        inv = match r.solve_upper_triangular(&CMat::identity(d, d)) {
            Some(r_inv) if r_inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => inv * r_inv,
            _ => CMat::from_element(d, d, C64::new(f64::INFINITY, 0.0)),
        };
        acc = r * acc;
        rescale(&mut acc, &mut scale);
        rescale(&mut inv, &mut inv_scale);
        let hi = singular_values(&acc)[0].ln() + scale;
        let lo = if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            -(singular_values(&inv)[0].ln() + inv_scale)
        } else {
            f64::NEG_INFINITY
        };
        visit(step + 1, hi, lo.min(hi));
    }
    Ok(log_det)
}

/// Exponent of an equivariant block from volume growth,
/// `mean_t log det(Q^n(t)|E(t)) / (n d)`, with the norm and co-norm rates as
/// companion estimates.
pub fn exponent_via_det(cocycle: &Cocycle, family: &[(i64, Subspace)], n: usize) -> Result<DetEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("power n must be >= 1".into()));
    }
    if family.is_empty() {
        return Err(Error::Empty("sample times"));
    }
    let mut samples = Vec::with_capacity(family.len());
    for (t, e) in family {
        let d = e.dim() as f64;
        let (mut hi, mut lo) = (f64::NAN, f64::NAN);
        let log_det = restricted_growth(cocycle, *t, e, n, None, |_, a, b| {
            hi = a;
            lo = b;
        })?;
        if log_det == f64::NEG_INFINITY || log_det.is_nan() {
            return Err(Error::DegenerateBlock { t: *t });
        }
        let (norm_rate, conorm_rate) = (hi / n as f64, lo / n as f64);
        // σ_min^d ≤ |det| ≤ σ_max^d holds exactly; clamping only absorbs the
        // rounding between the two ways of accumulating the same product.
        let raw = log_det / (n as f64 * d);
        let det_rate = raw.clamp(conorm_rate.min(norm_rate), norm_rate);
        samples.push(DetSample { t: *t, det_rate, norm_rate, conorm_rate, clamped: (raw - det_rate).abs() });
    }
    let m = samples.len() as f64;
    let mean = |f: fn(&DetSample) -> f64| samples.iter().map(f).sum::<f64>() / m;
    let exponent = mean(|s| s.det_rate);
    let stderr = if samples.len() > 1 {
        (samples.iter().map(|s| (s.det_rate - exponent).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        0.0
    };
    Ok(DetEstimate { exponent, stderr, norm: mean(|s| s.norm_rate), conorm: mean(|s| s.conorm_rate), n, samples })
}
