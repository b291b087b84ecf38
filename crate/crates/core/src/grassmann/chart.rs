use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, hcat, sigma_min, CMat};

use super::{Subspace, TRANSVERSALITY_TOL};

/// A complementary pair `E ⊕ F = C^D` with the coordinate map
/// `x ↦ [B_E B_F]^{-1} x` precomputed.
#[derive(Debug, Clone)]
pub struct Frame {
    e: Subspace,
    f: Subspace,
    coords: CMat,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.e == other.e && self.f == other.f)
    }
}

impl Frame {
    pub fn new(e: Subspace, f: Subspace) -> Result<Self> {
        if e.ambient() != f.ambient() {
            return Err(Error::DimensionMismatch { expected: e.ambient(), found: f.ambient() });
        }
        if e.dim() + f.dim() != e.ambient() {
            return Err(Error::DimensionMismatch { expected: e.ambient(), found: e.dim() + f.dim() });
        }
        let joined = hcat(e.basis(), f.basis());
        let coords = checked_inverse(&joined, TRANSVERSALITY_TOL).map_err(|sigma_min| Error::NotComplementary { sigma_min })?;
        Ok(Self { e, f, coords })
    }

    /// `E ⊕ E^⊥`.
    pub fn orthogonal(e: Subspace) -> Result<Self> {
        let f = e.complement().ok_or_else(|| Error::InvalidArgument("E is the whole space".into()))?;
        Self::new(e, f)
    }

    pub fn e(&self) -> &Subspace {
        &self.e
    }

    pub fn f(&self) -> &Subspace {
        &self.f
    }

    /// The same splitting with the roles of `E` and `F` exchanged.
    pub fn swapped(&self) -> Frame {
        let de = self.e.dim();
        let df = self.f.dim();
        let mut coords = CMat::zeros(self.coords.nrows(), self.coords.ncols());
        coords.rows_mut(0, df).copy_from(&self.coords.rows(de, df));
        coords.rows_mut(df, de).copy_from(&self.coords.rows(0, de));
        Frame { e: self.f.clone(), f: self.e.clone(), coords }
    }

    /// Coordinates `(a, b)` with `x = B_E a + B_F b`, column by column.
    pub fn decompose(&self, x: &CMat) -> (CMat, CMat) {
        let y = &self.coords * x;
        let de = self.e.dim();
        (y.rows(0, de).into_owned(), y.rows(de, self.f.dim()).into_owned())
    }

    /// `Π_{E||F}`.
    pub fn projection(&self) -> ObliqueProjection {
        let matrix = self.e.basis() * self.coords.rows(0, self.e.dim());
        ObliqueProjection { matrix, range_dim: self.e.dim() }
    }
}

/// Projection onto `E` parallel to `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueProjection {
    pub matrix: CMat,
    pub range_dim: usize,
}

impl ObliqueProjection {
    pub fn norm(&self) -> f64 {
        crate::linalg::spectral_norm(&self.matrix)
    }

    /// `Id - Π`, the projection onto `F` parallel to `E`.
    pub fn complementary(&self) -> ObliqueProjection {
        let dim = self.matrix.nrows();
        ObliqueProjection { matrix: CMat::identity(dim, dim) - &self.matrix, range_dim: dim - self.range_dim }
    }
}

pub fn oblique_proj(e: &Subspace, f: &Subspace) -> Result<ObliqueProjection> {
    Ok(Frame::new(e.clone(), f.clone())?.projection())
}

/// Graph coordinate `U : E → F` (a `d_F x d_E` matrix in the frame bases).
#[derive(Debug, Clone)]
pub struct GraphChart {
    pub u: CMat,
    pub frame: Arc<Frame>,
}

impl GraphChart {
    pub fn zero(frame: Arc<Frame>) -> Self {
        let u = CMat::zeros(frame.f.dim(), frame.e.dim());
        Self { u, frame }
    }

    pub fn new(u: CMat, frame: Arc<Frame>) -> Result<Self> {
        if u.shape() != (frame.f.dim(), frame.e.dim()) {
            return Err(Error::DimensionMismatch { expected: frame.f.dim(), found: u.nrows() });
        }
        Ok(Self { u, frame })
    }

    /// Operator norm of `U` (bases are orthonormal, so this is the spectral norm).
    pub fn norm(&self) -> f64 {
        crate::linalg::spectral_norm(&self.u)
    }

    /// `B_E + B_F U`, a (non-orthonormal) basis of `(Id + U)(E)`.
    fn graph_basis(&self) -> CMat {
        self.frame.e.basis() + self.frame.f.basis() * &self.u
    }
}

/// `Φ_{E⊕F}(E') = (Π_{E||F}|_{E'})^{-1} - Id`.
pub fn chart(frame: &Arc<Frame>, e_prime: &Subspace) -> Result<GraphChart> {
    if e_prime.dim() != frame.e.dim() {
        return Err(Error::DimensionMismatch { expected: frame.e.dim(), found: e_prime.dim() });
    }
    // B_{E'} = B_E X + B_F Y; then U = Y X^{-1}.
    let (x, y) = frame.decompose(e_prime.basis());
    let x_inv = checked_inverse(&x, TRANSVERSALITY_TOL).map_err(|sigma_min| Error::NotTransverse { sigma_min })?;
    GraphChart::new(y * x_inv, frame.clone())
}

/// `Φ^{-1}(U) = (Id + U)(E)`.
pub fn chart_inverse(u: &GraphChart) -> Subspace {
    // Columns of B_E + B_F U are independent because B_E has full rank and
    // the two blocks live in complementary subspaces.
    Subspace::new(&u.graph_basis()).expect("graph of a bounded operator has full rank")
}

/// Forward graph transform `S^*U = Π_{F2||E2} S (Id+U) (Π_{E2||F2} S (Id+U)|_{E1})^{-1}`
/// taking a chart on `from = (E1, F1)` to one on `to = (E2, F2)`.
pub fn forward_transform(s: &CMat, from: &Arc<Frame>, to: &Arc<Frame>, u: &GraphChart) -> Result<GraphChart> {
    if *u.frame != **from {
        return Err(Error::FrameMismatch);
    }
    if from.e.dim() != to.e.dim() {
        return Err(Error::DimensionMismatch { expected: from.e.dim(), found: to.e.dim() });
    }
    let image = s * u.graph_basis();
    let (x, y) = to.decompose(&image);
    let x_inv = checked_inverse(&x, TRANSVERSALITY_TOL).map_err(|sigma_min| Error::TransformSingular { sigma_min })?;
    GraphChart::new(y * x_inv, to.clone())
}

/// Backward graph transform
/// `S_*U = (Π_{E2||F2}(Id - U Π_{F2||E2}) S|_{E1})^{-1} (U Π_{F2||E2} - Π_{E2||F2}) S`,
/// taking a chart `U : F2 → E2` (frame `(F2, E2)`) to a chart `F1 → E1`
/// (frame `(F1, E1)`), where `from = (E1, F1)` and `to = (E2, F2)`.
pub fn backward_transform(s: &CMat, from: &Arc<Frame>, to: &Arc<Frame>, u: &GraphChart) -> Result<GraphChart> {
    let (e2, f2) = (&to.e, &to.f);
    if u.frame.e != *f2 || u.frame.f != *e2 {
        return Err(Error::FrameMismatch);
    }
    if from.e.dim() != e2.dim() {
        return Err(Error::DimensionMismatch { expected: from.e.dim(), found: e2.dim() });
    }
    let (a_e, b_e) = to.decompose(&(s * from.e.basis()));
    let (a_f, b_f) = to.decompose(&(s * from.f.basis()));
    let k = a_e - &u.u * b_e;
    let k_inv = checked_inverse(&k, TRANSVERSALITY_TOL).map_err(|sigma_min| Error::TransformSingular { sigma_min })?;
    let v = k_inv * (&u.u * b_f - a_f);
    GraphChart::new(v, Arc::new(from.swapped()))
}

/// Smallest singular value of `Π_{E||F}` restricted to `E'` (transversality margin).
pub fn transversality(frame: &Frame, e_prime: &Subspace) -> f64 {
    sigma_min(&frame.decompose(e_prime.basis()).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{gap, hausdorff};
    use crate::linalg::{max_abs, random_matrix, C64};

    fn random_frame(dim: usize, d: usize, seed: u64) -> Arc<Frame> {
        let e = Subspace::new(&random_matrix(dim, d, seed)).unwrap();
        let f = Subspace::new(&random_matrix(dim, dim - d, seed + 1)).unwrap();
        Arc::new(Frame::new(e, f).unwrap())
    }

    #[test]
    fn coordinate_projection() {
        let e = Subspace::coordinate(4, &[0]).unwrap();
        let f = Subspace::coordinate(4, &[1, 2, 3]).unwrap();
        let p = oblique_proj(&e, &f).unwrap();
        let mut expect = CMat::zeros(4, 4);
        expect[(0, 0)] = C64::new(1.0, 0.0);
        assert!(max_abs(&(p.matrix - expect)) < 1e-15);
        let g = Subspace::coordinate(4, &[0, 1]).unwrap();
        assert!(matches!(oblique_proj(&g, &g), Err(Error::NotComplementary { .. })));
    }

    #[test]
    fn random_projection_residuals() {
        let fr = random_frame(5, 2, 7);
        let p = fr.projection().matrix;
        assert!(max_abs(&(&p * &p - &p)) < 1e-12);
        assert!(max_abs(&(&p * fr.e().basis() - fr.e().basis())) < 1e-12);
        assert!(max_abs(&(&p * fr.f().basis())) < 1e-12);
    }

    #[test]
    fn two_dimensional_chart() {
        let e = Subspace::coordinate(2, &[0]).unwrap();
        let f = Subspace::coordinate(2, &[1]).unwrap();
        let fr = Arc::new(Frame::new(e.clone(), f).unwrap());
        assert!(chart(&fr, &e).unwrap().norm() < 1e-15);
        let t = 0.7;
        let line = Subspace::new(&CMat::from_row_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(t, 0.0)])).unwrap();
        let u = chart(&fr, &line).unwrap();
        assert!((u.u[(0, 0)] - C64::new(t, 0.0)).norm() < 1e-14);
        let back = chart_inverse(&u);
        assert!(gap(&back, &line) < 1e-14);
        assert!(gap(&chart_inverse(&GraphChart::zero(fr.clone())), &e) < 1e-15);
        let vertical = Subspace::coordinate(2, &[1]).unwrap();
        assert!(matches!(chart(&fr, &vertical), Err(Error::NotTransverse { .. })));
    }

    #[test]
    fn chart_round_trip_and_projection_identity() {
        for seed in 0..50 {
            let fr = random_frame(6, 2, seed);
            let u = GraphChart::new(random_matrix(4, 2, seed + 100).scale(3.0), fr.clone()).unwrap();
            let e_prime = chart_inverse(&u);
            let back = chart(&fr, &e_prime).unwrap();
            assert!(max_abs(&(&back.u - &u.u)) < 1e-10);
            // Π_{E'||F} = (Id + U)Π_{E||F} with U embedded as B_F U B_E^*-coordinates
            let lhs = oblique_proj(&e_prime, fr.f()).unwrap().matrix;
            let (top, _) = fr.decompose(&CMat::identity(6, 6));
            let rhs = (fr.e().basis() + fr.f().basis() * &u.u) * top;
            assert!(max_abs(&(lhs - rhs)) < 1e-10);
        }
    }

    #[test]
    fn identity_and_invariant_transforms() {
        let fr = random_frame(5, 2, 3);
        let u = GraphChart::new(random_matrix(3, 2, 4), fr.clone()).unwrap();
        let id = CMat::identity(5, 5);
        let fwd = forward_transform(&id, &fr, &fr, &u).unwrap();
        assert!(max_abs(&(&fwd.u - &u.u)) < 1e-12);
        let sw = Arc::new(fr.swapped());
        let v = GraphChart::new(random_matrix(2, 3, 5), sw.clone()).unwrap();
        let bwd = backward_transform(&id, &fr, &fr, &v).unwrap();
        assert!(max_abs(&(&bwd.u - &v.u)) < 1e-12);

        // block-diagonal S in the frame keeps both zero charts fixed
        let blocks = hcat(fr.e().basis(), fr.f().basis());
        let mut diag = CMat::zeros(5, 5);
        diag.view_mut((0, 0), (2, 2)).copy_from(&random_matrix(2, 2, 6));
        diag.view_mut((2, 2), (3, 3)).copy_from(&random_matrix(3, 3, 7));
        let s = &blocks * diag * blocks.clone().try_inverse().unwrap();
        assert!(forward_transform(&s, &fr, &fr, &GraphChart::zero(fr.clone())).unwrap().norm() < 1e-12);
        assert!(backward_transform(&s, &fr, &fr, &GraphChart::zero(sw.clone())).unwrap().norm() < 1e-12);
    }

    #[test]
    fn transforms_check_frames() {
        let fr = random_frame(5, 2, 3);
        let other = random_frame(5, 2, 30);
        let u = GraphChart::zero(other.clone());
        assert!(matches!(forward_transform(&CMat::identity(5, 5), &fr, &fr, &u), Err(Error::FrameMismatch)));
        assert!(matches!(backward_transform(&CMat::identity(5, 5), &fr, &fr, &u), Err(Error::FrameMismatch)));
    }

    #[test]
    fn forward_agrees_with_image_backward_with_preimage() {
        for seed in 0..50 {
            let (f1, f2) = (random_frame(6, 2, seed), random_frame(6, 2, seed + 1000));
            let s = random_matrix(6, 6, seed + 2000);
            let u = GraphChart::new(random_matrix(4, 2, seed + 3000), f1.clone()).unwrap();
            let fwd = forward_transform(&s, &f1, &f2, &u).unwrap();
            let direct = chart_inverse(&u).image(&s).unwrap();
            assert!(hausdorff(&chart_inverse(&fwd), &direct) <= 1e-9);

            let v = GraphChart::new(random_matrix(2, 4, seed + 4000), Arc::new(f2.swapped())).unwrap();
            let bwd = backward_transform(&s, &f1, &f2, &v).unwrap();
            let target = chart_inverse(&v);
            let pre = target.image(&s.clone().try_inverse().unwrap()).unwrap();
            assert!(hausdorff(&chart_inverse(&bwd), &pre) <= 1e-9);
        }
    }
}
