use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grassmann::{Frame, Subspace};
use crate::linalg::{random_matrix, CMat};
use crate::transfer::Cocycle;

/// Reference splittings `E_ref(t) ⊕ F_ref(t)` against which graph charts are
/// taken.
#[derive(Debug, Clone)]
pub enum FrameField {
    /// The same frame at every time.
    Constant(Arc<Frame>),
    /// One frame per fiber index.
    PerFiber(Vec<Arc<Frame>>),
    /// Approximate splitting obtained by sweeping the cocycle: `E_ref` from a
    /// forward push of a generic subspace, `F_ref` as the annihilator of a
    /// backward push under the adjoint cocycle.
    Swept(SweptFrames),
}

#[derive(Debug, Clone)]
pub struct SweptFrames {
    lo: i64,
    fast: Vec<CMat>,
    adjoint: Vec<CMat>,
}

impl FrameField {
    pub fn constant(e: Subspace, f: Subspace) -> Result<Self> {
        Ok(FrameField::Constant(Arc::new(Frame::new(e, f)?)))
    }

    /// Sweep `cocycle` to build reference frames of fast dimension `d` on
    /// `[lo, hi]`. The window must cover `[lo - warmup, hi + warmup]`.
    pub fn swept(cocycle: &Cocycle, d: usize, lo: i64, hi: i64, warmup: usize, seed: u64) -> Result<Self> {
        let dim = cocycle.dim();
        if d == 0 || d >= dim {
            return Err(Error::InvalidArgument(format!("frame dimension must lie in [1, {}), got {d}", dim)));
        }
        if hi < lo {
            return Err(Error::InvalidArgument(format!("empty frame range [{lo}, {hi}]")));
        }
        let w = warmup as i64;
        let len = (hi - lo + 1) as usize;
        let mut fast = Vec::with_capacity(len);
        let mut e = Subspace::new(&random_matrix(dim, d, seed))?;
        for t in lo - w..=hi {
            if t >= lo {
                fast.push(e.basis().clone());
            }
            if t < hi {
                e = e.image(cocycle.matrix(t)?)?;
            }
        }
        let mut adjoint = vec![CMat::zeros(0, 0); len];
        let mut h = Subspace::new(&random_matrix(dim, d, seed ^ 0x5eed_0f_ad_701))?;
        for t in (lo..=hi + w).rev() {
            if t <= hi {
                adjoint[(t - lo) as usize] = h.basis().clone();
            }
            if t > lo {
                h = h.image(&cocycle.matrix(t - 1)?.adjoint())?;
            }
        }
        Ok(FrameField::Swept(SweptFrames { lo, fast, adjoint }))
    }

    pub fn frame(&self, cocycle: &Cocycle, t: i64) -> Result<Arc<Frame>> {
        match self {
            FrameField::Constant(f) => Ok(f.clone()),
            FrameField::PerFiber(fs) => {
                let i = cocycle.path().index(t)?;
                fs.get(i).cloned().ok_or_else(|| Error::Config(format!("no reference frame for fiber {i}")))
            }
            FrameField::Swept(s) => {
                let hi = s.lo + s.fast.len() as i64 - 1;
                if t < s.lo || t > hi {
                    return Err(Error::WindowViolation { t, lo: s.lo, hi });
                }
                let i = (t - s.lo) as usize;
                let e = Subspace::from_orthonormal(s.fast[i].clone());
                let h = Subspace::from_orthonormal(s.adjoint[i].clone());
                let f = h.complement().expect("adjoint space is proper");
                Ok(Arc::new(Frame::new(e, f)?))
            }
        }
    }

    /// Range of times where frames are available, if limited.
    pub fn range(&self) -> Option<(i64, i64)> {
        match self {
            FrameField::Swept(s) => Some((s.lo, s.lo + s.fast.len() as i64 - 1)),
            _ => None,
        }
    }

    /// Fast dimension of the reference splitting.
    pub fn dim(&self) -> usize {
        match self {
            FrameField::Constant(f) => f.e().dim(),
            FrameField::PerFiber(fs) => fs.first().map_or(0, |f| f.e().dim()),
            FrameField::Swept(s) => s.fast[0].ncols(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::gap;
    use crate::linalg::random_matrix;
    use crate::transfer::{CocyclePath, Driver};

    #[test]
    fn swept_frames_are_nearly_invariant() {
        let mats = vec![random_matrix(5, 5, 11), random_matrix(5, 5, 12)];
        let path = CocyclePath::sample(&Driver::iid(vec![0.5, 0.5], vec![0, 1], 3), 300, 300).unwrap();
        let c = Cocycle::new(path, mats).unwrap();
        let field = FrameField::swept(&c, 2, -50, 50, 200, 9).unwrap();
        for t in [-50, 0, 49] {
            let (now, next) = (field.frame(&c, t).unwrap(), field.frame(&c, t + 1).unwrap());
            let m = c.matrix(t).unwrap();
            assert!(gap(&now.e().image(m).unwrap(), next.e()) < 1e-8);
            assert!(gap(&now.f().image(m).unwrap(), next.f()) < 1e-8);
        }
        assert!(matches!(field.frame(&c, 51), Err(Error::WindowViolation { .. })));
        assert!(FrameField::swept(&c, 2, -50, 50, 400, 9).is_err());
    }
}
