use crate::error::{Error, Result};
use crate::linalg::{max_abs, thin_qr, CMat, C64};

use super::CocyclePath;

/// A fiber-indexed matrix family together with a realised path.
#[derive(Debug, Clone)]
pub struct Cocycle {
    path: CocyclePath,
    mats: Vec<CMat>,
    dim: usize,
}

/// `Q · R · exp(log_scale)` representation of a long product.
#[derive(Debug, Clone)]
pub struct StabilizedProduct {
    pub q: CMat,
    pub r: CMat,
    pub log_scale: f64,
}

impl StabilizedProduct {
    pub fn to_dense(&self) -> CMat {
        (&self.q * &self.r).scale(self.log_scale.exp())
    }
}

impl Cocycle {
    /// `mats[i]` is the matrix of map index `i`; every index the path visits must exist.
    pub fn new(path: CocyclePath, mats: Vec<CMat>) -> Result<Self> {
        let dim = mats.first().ok_or(Error::Empty("fiber matrices"))?.nrows();
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows().max(m.ncols()) });
            }
        }
        if let Some(&bad) = path.driver().fibers.iter().find(|&&f| f >= mats.len()) {
            return Err(Error::Config(format!("path refers to fiber {bad} but only {} matrices given", mats.len())));
        }
        Ok(Self { path, mats, dim })
    }

    /// Same path, different matrices (e.g. perturbed maps or another basis).
    pub fn with_mats(&self, mats: Vec<CMat>) -> Result<Self> {
        Self::new(self.path.clone(), mats)
    }

    pub fn path(&self) -> &CocyclePath {
        &self.path
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, t: i64) -> Result<&CMat> {
        Ok(&self.mats[self.path.index(t)?])
    }

    fn check_span(&self, t0: i64, p: usize) -> Result<()> {
        if p > 0 {
            self.path.index(t0)?;
            self.path.index(t0 + p as i64 - 1)?;
        }
        Ok(())
    }

    /// `M(t0+p-1) ⋯ M(t0)`; the identity for `p = 0`.
    pub fn product(&self, t0: i64, p: usize) -> Result<CMat> {
        self.check_span(t0, p)?;
        let mut out = CMat::identity(self.dim, self.dim);
        for s in 0..p as i64 {
            out = self.matrix(t0 + s)? * out;
        }
        Ok(out)
    }

    /// The same product with a QR re-orthonormalisation after every factor and
    /// the scale of the triangular part kept as a separate logarithm.
    pub fn product_stabilized(&self, t0: i64, p: usize) -> Result<StabilizedProduct> {
        self.check_span(t0, p)?;
        let mut q = CMat::identity(self.dim, self.dim);
        let mut r = CMat::identity(self.dim, self.dim);
        let mut log_scale = 0.0;
        for s in 0..p as i64 {
            let y = self.matrix(t0 + s)? * &q;
            let (q_new, r_step, _) = thin_qr(&y);
            q = q_new;
            r = r_step * r;
            let big = max_abs(&r);
            if big > 0.0 {
                r /= C64::new(big, 0.0);
                log_scale += big.ln();
            }
        }
        Ok(StabilizedProduct { q, r, log_scale })
    }
}
