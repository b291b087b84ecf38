//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance used to decide numerical rank of a QR factor.
pub const RANK_TOL: f64 = 1e-13;

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest of the `min(rows, cols)` singular values.
pub fn sigma_min(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Thin QR with a rank check. Returns the orthonormal factor, the triangular
/// factor and the numerical rank (diagonal entries above `RANK_TOL * max`).
pub fn thin_qr(m: &CMat) -> (CMat, CMat, usize) {
    let qr = m.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let scale = (0..k).fold(0.0f64, |acc, i| acc.max(r[(i, i)].norm()));
    let rank = (0..k)
        .filter(|&i| r[(i, i)].norm() > RANK_TOL * scale.max(f64::MIN_POSITIVE))
        .count();
    (q, r, rank)
}

/// Orthonormal basis of the column span; fails when columns are dependent.
pub fn orthonormalize(m: &CMat) -> Result<CMat> {
    let (q, _, rank) = thin_qr(m);
    if rank < m.ncols() {
        return Err(Error::RankCollapse { rank, expected: m.ncols() });
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the span of `b`
/// (assumed orthonormal, `D x d`), returned as a `D x (D - d)` matrix.
pub fn complement(b: &CMat) -> CMat {
    let dim = b.nrows();
    let d = b.ncols();
    let mut aug = CMat::zeros(dim, d + dim);
    aug.view_mut((0, 0), (dim, d)).copy_from(b);
    aug.view_mut((0, d), (dim, dim)).fill_with_identity();
    let q = aug.qr().q();
    q.columns(d, dim - d).into_owned()
}

pub fn hcat(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// Inverse of a square matrix with a singular-value floor check.
pub fn checked_inverse(m: &CMat, floor: f64) -> std::result::Result<CMat, f64> {
    let smin = sigma_min(m);
    if !(smin >= floor) {
        return Err(smin);
    }
    m.clone().try_inverse().ok_or(smin)
}

/// Seeded random complex matrix with entries uniform on the unit disc.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(rows, cols, |_, _| unit_disc(&mut rng))
}

pub fn unit_disc<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r = rng.gen::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    C64::from_polar(r, theta)
}

pub fn mat_pow(m: &CMat, p: u32) -> CMat {
    let mut out = CMat::identity(m.nrows(), m.ncols());
    for _ in 0..p {
        out = m * &out;
    }
    out
}
