//! Lyapunov spectra and Oseledets splittings of matrix cocycles.
//!
//! Fast spaces come from the forward graph transform iterated against a
//! reference frame field; slow spaces from the backward transform, charted
//! against the computed fast spaces. Exponents come from discrete QR and,
//! block by block, from volume growth on the computed spaces.

mod certificate;
mod det;
mod fixpoint;
mod frames;
mod spectrum;

pub use certificate::{hyperbolicity_certificate, HyperbolicityCertificate};
pub use det::{equivariant_family, exponent_via_det, DetEstimate, DetSample};
pub use fixpoint::{fast_chart_fixpoint, fast_space_pullforward, slow_chart_fixpoint, ChartSolution, FixpointOptions, PullForward};
pub use frames::{FrameField, SweptFrames};
pub use spectrum::{qr_spectrum, LyapunovSpectrum, QrOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{gap, Frame, ObliqueProjection, Subspace};
use crate::linalg::{singular_values, spectral_norm, CMat};
use crate::transfer::Cocycle;

/// Fast/slow splitting at one time, with its diagnostics.
#[derive(Debug, Clone)]
pub struct SplittingState {
    pub t: i64,
    pub fast: Subspace,
    /// `None` when the fast space is the whole space.
    pub slow: Option<Subspace>,
    /// `Π_{E||F}`.
    pub proj: ObliqueProjection,
    /// `‖U‖` of the fast chart.
    pub chart_norm: f64,
    /// `‖V‖` of the slow chart.
    pub slow_chart_norm: f64,
    /// `gap(M(t) E(t), E(t+1))` against an independent solve at `t + 1`.
    pub fast_defect: f64,
    /// `‖(Id - P_{F(t+1)}) M(t)|_{F(t)}‖ / ‖M(t)‖`.
    pub slow_defect: f64,
    /// Larger of the two defects.
    pub residual: f64,
    pub contraction: f64,
    pub slow_contraction: f64,
    pub block: usize,
    pub slow_block: usize,
}

/// Serializable digest of a [`SplittingState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingSummary {
    pub t: i64,
    pub d: usize,
    pub chart_norm: f64,
    pub slow_chart_norm: f64,
    pub residual: f64,
    pub fast_defect: f64,
    pub slow_defect: f64,
    pub contraction: f64,
    pub block: usize,
    pub projection_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis_file: Option<String>,
}

impl SplittingState {
    pub fn dim(&self) -> usize {
        self.fast.dim()
    }

    pub fn summary(&self) -> SplittingSummary {
        SplittingSummary {
            t: self.t,
            d: self.dim(),
            chart_norm: self.chart_norm,
            slow_chart_norm: self.slow_chart_norm,
            residual: self.residual,
            fast_defect: self.fast_defect,
            slow_defect: self.slow_defect,
            contraction: self.contraction,
            block: self.block,
            projection_norm: self.proj.norm(),
            basis_file: None,
        }
    }

    fn whole_space(t: i64, dim: usize) -> Self {
        let all: Vec<usize> = (0..dim).collect();
        SplittingState {
            t,
            fast: Subspace::coordinate(dim, &all).expect("full coordinate space"),
            slow: None,
            proj: ObliqueProjection { matrix: CMat::identity(dim, dim), range_dim: dim },
            chart_norm: 0.0,
            slow_chart_norm: 0.0,
            fast_defect: 0.0,
            slow_defect: 0.0,
            residual: 0.0,
            contraction: 0.0,
            slow_contraction: 0.0,
            block: 0,
            slow_block: 0,
        }
    }
}

/// Forward-invariance defect of a slow space, relative to `‖M‖`.
pub fn slow_invariance_defect(m: &CMat, f_now: &Subspace, f_next: &Subspace) -> f64 {
    let image = m * f_now.basis();
    let residual = &image - f_next.basis() * (f_next.basis().adjoint() * &image);
    let scale = spectral_norm(m);
    if scale == 0.0 {
        0.0
    } else {
        spectral_norm(&residual) / scale
    }
}

/// Fast space of dimension `d` and its slow complement at `t`, with
/// equivariance defects measured against independent solves at `t + 1`.
pub fn splitting_at(cocycle: &Cocycle, t: i64, d: usize, reference: &FrameField, opts: &FixpointOptions) -> Result<SplittingState> {
    let dim = cocycle.dim();
    if d == dim {
        return Ok(SplittingState::whole_space(t, dim));
    }
    if reference.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: reference.dim() });
    }
    let fast = fast_chart_fixpoint(cocycle, t, reference, opts)?;
    let fast_next = fast_chart_fixpoint(cocycle, t + 1, reference, opts)?;
    let slow = slow_chart_fixpoint(cocycle, t, &fast.space, reference, opts)?;
    let slow_next = slow_chart_fixpoint(cocycle, t + 1, &fast_next.space, reference, opts)?;
    let m = cocycle.matrix(t)?;
    let fast_defect = gap(&fast.space.image(m)?, &fast_next.space);
    let slow_defect = slow_invariance_defect(m, &slow.space, &slow_next.space);
    let proj = Frame::new(fast.space.clone(), slow.space.clone())?.projection();
    Ok(SplittingState {
        t,
        chart_norm: fast.chart.norm(),
        slow_chart_norm: slow.chart.norm(),
        fast: fast.space,
        slow: Some(slow.space),
        proj,
        fast_defect,
        slow_defect,
        residual: fast_defect.max(slow_defect),
        contraction: fast.contraction,
        slow_contraction: slow.contraction,
        block: fast.block,
        slow_block: slow.block,
    })
}

/// Projection onto the `i`-th Oseledets block (1-based) from splittings at
/// nested fast dimensions `d_1 < d_1 + d_2 < …`, all at the same time:
/// `Π_i = Π_{U_i||V_i} (Id - Π_{U_{i-1}||V_{i-1}})`.
pub fn oseledets_projection(splittings: &[SplittingState], i: usize) -> Result<ObliqueProjection> {
    if i == 0 || i > splittings.len() {
        return Err(Error::InvalidArgument(format!("block index {i} outside 1..={}", splittings.len())));
    }
    let dims: Vec<usize> = splittings.iter().map(|s| s.dim()).collect();
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("fast dimensions must increase, got {dims:?}")));
    }
    if splittings.iter().any(|s| s.t != splittings[0].t) {
        return Err(Error::InvalidArgument("splittings taken at different times".into()));
    }
    let current = &splittings[i - 1].proj;
    if i == 1 {
        return Ok(current.clone());
    }
    let previous = &splittings[i - 2].proj;
    let matrix = &current.matrix * previous.complementary().matrix;
    let expected = dims[i - 1] - dims[i - 2];
    let sv = singular_values(&matrix);
    let scale = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > 1e-8 * scale).count();
    if rank != expected {
        let sigma_min = sv.get(expected - 1).copied().unwrap_or(0.0);
        return Err(Error::NotComplementary { sigma_min });
    }
    Ok(ObliqueProjection { matrix, range_dim: expected })
}
