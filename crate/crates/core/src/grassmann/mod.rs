//! Finite-dimensional Grassmannian toolkit: subspaces, oblique projections,
//! graph charts, forward/backward graph transforms, gap and Hausdorff
//! distances, and volume distortion on subspaces.
//!
//! All routines work in Euclidean coordinates. The weighted inner product
//! used for transfer operators is handled by [`ModuleMetric`], which moves
//! matrices into coordinates where that inner product is the standard one.

mod chart;

pub use chart::{backward_transform, chart, chart_inverse, forward_transform, oblique_proj, transversality, Frame, GraphChart, ObliqueProjection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, singular_values, CMat, C64};
use crate::spectral::NormOrder;

/// Smallest singular value below which splittings count as degenerate.
pub const TRANSVERSALITY_TOL: f64 = 1e-10;

/// A subspace of `C^D` stored as an orthonormal basis (`D x d`, `d ≥ 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Span of the columns of `m`; fails if they are linearly dependent.
    pub fn new(m: &CMat) -> Result<Self> {
        if m.ncols() == 0 || m.ncols() > m.nrows() {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension must lie in 1..={}, got {}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { basis: orthonormalize(m)? })
    }

    /// Wrap a basis already known to be orthonormal.
    pub(crate) fn from_orthonormal(basis: CMat) -> Self {
        Self { basis }
    }

    /// Span of the coordinate vectors with the given positions.
    pub fn coordinate(ambient: usize, positions: &[usize]) -> Result<Self> {
        let mut m = CMat::zeros(ambient, positions.len());
        for (c, &p) in positions.iter().enumerate() {
            if p >= ambient {
                return Err(Error::InvalidArgument(format!("coordinate {p} out of range")));
            }
            m[(p, c)] = C64::new(1.0, 0.0);
        }
        Self::new(&m)
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthogonal projector `B B^*`.
    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// Image under `a`; fails if `a` collapses the subspace.
    pub fn image(&self, a: &CMat) -> Result<Subspace> {
        Subspace::new(&(a * &self.basis))
    }

    /// Orthogonal complement (`None` for the whole space).
    pub fn complement(&self) -> Option<Subspace> {
        (self.dim() < self.ambient()).then(|| Subspace::from_orthonormal(crate::linalg::complement(&self.basis)))
    }

    /// Embed into a larger ambient space by zero padding every basis vector
    /// symmetrically (order `n` Fourier coordinates into order `n_big`).
    pub fn zero_padded(&self, ambient: usize) -> Result<Subspace> {
        let small = self.ambient();
        if ambient < small || (ambient - small) % 2 != 0 {
            return Err(Error::DimensionMismatch { expected: small, found: ambient });
        }
        let off = (ambient - small) / 2;
        let mut m = CMat::zeros(ambient, self.dim());
        m.view_mut((off, 0), self.basis.shape()).copy_from(&self.basis);
        Ok(Subspace::from_orthonormal(m))
    }
}

/// `sup_{e ∈ E, |e| = 1} dist(e, F)`.
pub fn gap(e: &Subspace, f: &Subspace) -> f64 {
    let residual = e.basis() - f.basis() * (f.basis().adjoint() * e.basis());
    singular_values(&residual).first().copied().unwrap_or(0.0).min(1.0)
}

/// One-sided `sup_{e ∈ S_E} inf_{f ∈ S_F} |e - f|` over unit spheres.
fn sphere_excess(e: &Subspace, f: &Subspace) -> f64 {
    // The nearest unit vector to a unit e is P_F e / |P_F e|, at distance
    // 2 sin(θ/2) where θ is the angle between e and F; the worst e sits at
    // the largest principal angle. Taking θ from both its sine and cosine
    // keeps small distances accurate.
    if e.dim() > f.dim() {
        return std::f64::consts::SQRT_2;
    }
    let c = singular_values(&(f.basis().adjoint() * e.basis())).last().copied().unwrap_or(0.0).min(1.0);
    let s = gap(e, f);
    2.0 * (0.5 * s.atan2(c)).sin()
}

/// Hausdorff distance between unit spheres.
pub fn hausdorff(e: &Subspace, f: &Subspace) -> f64 {
    sphere_excess(e, f).max(sphere_excess(f, e))
}

/// Volume distortion of `a` on `E`: product of the singular values of `a|_E`.
pub fn det_on(a: &CMat, e: &Subspace) -> f64 {
    singular_values(&(a * e.basis())).iter().product()
}

/// `log det_on`, computed as a sum of logarithms (no under/overflow).
pub fn log_det_on(a: &CMat, e: &Subspace) -> f64 {
    singular_values(&(a * e.basis())).iter().map(|s| s.ln()).sum()
}

/// Diagonal weighted inner product `<x, y> = Σ w(ℓ)² x_ℓ conj(y_ℓ)` with
/// `w = w_s`, realised by the change of coordinates `x ↦ W x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleMetric {
    pub order: usize,
    pub smoothness: NormOrder,
    weights: Vec<f64>,
}

impl ModuleMetric {
    pub fn new(order: usize, smoothness: NormOrder) -> Self {
        Self { order, smoothness, weights: smoothness.weights(order) }
    }

    pub fn euclidean(order: usize) -> Self {
        Self { order, smoothness: NormOrder(0), weights: vec![1.0; 2 * order + 1] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn describe(&self) -> String {
        format!("weighted-l2, weights w_{}(l)^2", self.smoothness.0)
    }

    /// `W A W^{-1}`.
    pub fn to_module(&self, a: &CMat) -> CMat {
        let w = &self.weights;
        CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (w[i] / w[j]))
    }

    /// `W^{-1} A W`.
    pub fn from_module(&self, a: &CMat) -> CMat {
        let w = &self.weights;
        CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (w[j] / w[i]))
    }

    /// Rows scaled by `W`: vectors into module coordinates.
    pub fn vectors_to_module(&self, v: &CMat) -> CMat {
        CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.weights[i])
    }

    pub fn vectors_from_module(&self, v: &CMat) -> CMat {
        CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] / self.weights[i])
    }
}
