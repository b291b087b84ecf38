use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{backward_transform, chart_inverse, forward_transform, gap, Frame, GraphChart, Subspace};
use crate::linalg::{random_matrix, spectral_norm, thin_qr, CMat};
use crate::transfer::Cocycle;

use super::FrameField;

/// Iteration controls shared by the fast and slow chart iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixpointOptions {
    /// Steps per transform; `None` picks it adaptively.
    pub block: Option<usize>,
    /// Cap for the adaptive block length.
    pub max_block: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        Self { block: None, max_block: 64, max_iters: 200, tol: 1e-10 }
    }
}

impl FixpointOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_block(mut self, p: usize) -> Self {
        self.block = Some(p);
        self
    }
}

/// Result of a chart iteration at one time.
#[derive(Debug, Clone)]
pub struct ChartSolution {
    pub t: i64,
    pub space: Subspace,
    pub chart: GraphChart,
    /// Last observed ratio of successive chart differences.
    pub contraction: f64,
    pub block: usize,
    pub iterations: usize,
    /// Last chart difference.
    pub last_step: f64,
}

/// Pull-forward estimate of the fast space at `t`.
#[derive(Debug, Clone)]
pub struct PullForward {
    pub space: Subspace,
    /// Gap between the results for pull-back lengths `m` and `m / 2`.
    pub diagnostic: f64,
}

/// `E(t) ≈ Q^m(t - m) V0`, orthonormalised every step.
pub fn fast_space_pullforward(cocycle: &Cocycle, t: i64, d: usize, m: usize, v0: Option<&Subspace>, seed: u64) -> Result<PullForward> {
    let dim = cocycle.dim();
    let seed_space = match v0 {
        Some(v) => {
            if v.dim() != d || v.ambient() != dim {
                return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
            }
            v.clone()
        }
        None => Subspace::new(&random_matrix(dim, d, seed))?,
    };
    let push = |len: usize| -> Result<Subspace> {
        let mut b = seed_space.basis().clone();
        for s in t - len as i64..t {
            let (q, _, rank) = thin_qr(&(cocycle.matrix(s)? * b));
            if rank < d {
                return Err(Error::RankCollapse { rank, expected: d });
            }
            b = q;
        }
        Ok(Subspace::from_orthonormal(b))
    };
    cocycle.path().index(t - m as i64)?;
    let space = push(m)?;
    let half = push(m / 2)?;
    let diagnostic = gap(&space, &half).max(gap(&half, &space));
    Ok(PullForward { space, diagnostic })
}

enum Attempt {
    Done(GraphChart, f64, usize, f64),
    TooSlow,
    Diverged(usize, f64),
}

/// Tracks chart differences and decides when an iteration has converged,
/// stalled or diverged.
struct Monitor {
    tol: f64,
    adaptive: bool,
    prev: Option<CMat>,
    last_diff: Option<f64>,
    ratio: f64,
    rising: usize,
}

enum Verdict {
    Continue,
    Converged,
    TooSlow,
    Diverged,
}

impl Monitor {
    fn new(tol: f64, adaptive: bool) -> Self {
        Self { tol, adaptive, prev: None, last_diff: None, ratio: f64::NAN, rising: 0 }
    }

    fn observe(&mut self, k: usize, u: &CMat) -> Verdict {
        let diff = match &self.prev {
            Some(p) => spectral_norm(&(u - p)),
            None => spectral_norm(u),
        };
        self.prev = Some(u.clone());
        if let Some(last) = self.last_diff {
            self.ratio = if last > 0.0 { diff / last } else if diff > 0.0 { f64::INFINITY } else { 0.0 };
            self.rising = if self.ratio > 1.0 { self.rising + 1 } else { 0 };
        }
        self.last_diff = Some(diff);
        if diff <= self.tol {
            return Verdict::Converged;
        }
        if self.rising >= 3 || !diff.is_finite() {
            return Verdict::Diverged;
        }
        if self.adaptive && k >= 3 && self.ratio >= 0.9 {
            return Verdict::TooSlow;
        }
        Verdict::Continue
    }
}

fn with_adaptive_block<F>(opts: &FixpointOptions, mut attempt: F) -> Result<(GraphChart, f64, usize, usize, f64)>
where
    F: FnMut(usize, bool) -> Result<Attempt>,
{
    let adaptive = opts.block.is_none();
    let mut p = opts.block.unwrap_or(1).max(1);
    loop {
        let can_grow = adaptive && p < opts.max_block;
        match attempt(p, can_grow)? {
            Attempt::Done(u, ratio, iterations, last) => return Ok((u, ratio, p, iterations, last)),
            Attempt::TooSlow => p = (2 * p).min(opts.max_block),
            Attempt::Diverged(iterations, ratio) => {
                if can_grow {
                    p = (2 * p).min(opts.max_block);
                } else {
                    return Err(Error::NoContraction { iterations, ratio });
                }
            }
        }
    }
}

/// Fixed point of the forward graph transform at `t`: the chart of
/// `(S^{kp})^* 0`, pulled from successively earlier times `t - kp`, relative
/// to the reference frames.
pub fn fast_chart_fixpoint(cocycle: &Cocycle, t: i64, reference: &FrameField, opts: &FixpointOptions) -> Result<ChartSolution> {
    let (u, contraction, block, iterations, last_step) = with_adaptive_block(opts, |p, can_grow| {
        let mut frames: Vec<Arc<Frame>> = vec![reference.frame(cocycle, t)?];
        let mut blocks: Vec<CMat> = vec![CMat::zeros(0, 0)];
        let mut monitor = Monitor::new(opts.tol, can_grow);
        for k in 1..=opts.max_iters {
            let s0 = t - (k * p) as i64;
            blocks.push(cocycle.product(s0, p)?);
            frames.push(reference.frame(cocycle, s0)?);
            let mut u = GraphChart::zero(frames[k].clone());
            for j in (1..=k).rev() {
                u = forward_transform(&blocks[j], &frames[j], &frames[j - 1], &u)?;
            }
            match monitor.observe(k, &u.u) {
                Verdict::Converged => return Ok(Attempt::Done(u, monitor.ratio, k, monitor.last_diff.unwrap_or(0.0))),
                Verdict::Diverged => return Ok(Attempt::Diverged(k, monitor.ratio)),
                Verdict::TooSlow => return Ok(Attempt::TooSlow),
                Verdict::Continue => {}
            }
        }
        Ok(Attempt::Diverged(opts.max_iters, monitor.ratio))
    })?;
    Ok(ChartSolution { t, space: chart_inverse(&u), chart: u, contraction, block, iterations, last_step })
}

/// Fixed point of the backward graph transform at `t`: with frames
/// `E^S(s) ⊕ F_ref(s)`, where `E^S(t + jp)` is the image of `fast` and
/// `F_ref` comes from `reference`, the chart of `(S^{kp})_* 0` pulled from
/// successively later times. The returned space is the slow space `F^S(t)`.
pub fn slow_chart_fixpoint(
    cocycle: &Cocycle,
    t: i64,
    fast: &Subspace,
    reference: &FrameField,
    opts: &FixpointOptions,
) -> Result<ChartSolution> {
    let (v, contraction, block, iterations, last_step) = with_adaptive_block(opts, |p, can_grow| {
        let first = Arc::new(Frame::new(fast.clone(), reference.frame(cocycle, t)?.f().clone())?);
        let mut frames: Vec<Arc<Frame>> = vec![first];
        let mut blocks: Vec<CMat> = vec![CMat::zeros(0, 0)];
        let mut monitor = Monitor::new(opts.tol, can_grow);
        for k in 1..=opts.max_iters {
            let s0 = t + ((k - 1) * p) as i64;
            let b = cocycle.product(s0, p)?;
            let e_next = frames[k - 1].e().image(&b)?;
            let f_next = reference.frame(cocycle, s0 + p as i64)?.f().clone();
            frames.push(Arc::new(Frame::new(e_next, f_next)?));
            blocks.push(b);
            let mut v = GraphChart::zero(Arc::new(frames[k].swapped()));
            for j in (1..=k).rev() {
                v = backward_transform(&blocks[j], &frames[j - 1], &frames[j], &v)?;
            }
            match monitor.observe(k, &v.u) {
                Verdict::Converged => return Ok(Attempt::Done(v, monitor.ratio, k, monitor.last_diff.unwrap_or(0.0))),
                Verdict::Diverged => return Ok(Attempt::Diverged(k, monitor.ratio)),
                Verdict::TooSlow => return Ok(Attempt::TooSlow),
                Verdict::Continue => {}
            }
        }
        Ok(Attempt::Diverged(opts.max_iters, monitor.ratio))
    })?;
    Ok(ChartSolution { t, space: chart_inverse(&v), chart: v, contraction, block, iterations, last_step })
}
