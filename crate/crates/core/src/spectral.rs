//! Fourier-coefficient functions on the circle and the weighted-ℓ¹ norm
//! machinery used as a computable stand-in for `W^{s,1}` Sobolev norms.
//!
//! A function is represented by its coefficients `c_ℓ`, `ℓ ∈ {-n, …, n}`,
//! and measured by
//!
//! ```text
//! ‖f‖_s = Σ_ℓ w_s(ℓ) |c_ℓ|,    w_s(ℓ) = 1 + (2π|ℓ|)^s,  w_s(0) = 1.
//! ```
//!
//! Because the norm is a weighted ℓ¹ norm, operator norms between two such
//! norms are exact column maxima, which makes strong→weak "triple norms"
//! computable in closed form. The pair (order `k-1`, order `k-2`) plays the
//! role of the strong/weak Saks-space pair.

use std::f64::consts::TAU;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unit_disc, CMat, C64};

/// Description of the weight rule, emitted with every result file.
pub const WEIGHT_RULE: &str = "1+(2*pi*abs(l))^s";

/// Truncated Fourier coefficient vector `(c_{-n}, …, c_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector {
    coeffs: Vec<C64>,
    real: bool,
}

impl FourierVector {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector must have odd length 2n+1, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { coeffs, real: false })
    }

    /// Coefficients of a real-valued function; checks `c_{-ℓ} = conj(c_ℓ)`.
    pub fn new_real(coeffs: Vec<C64>) -> Result<Self> {
        let mut v = Self::new(coeffs)?;
        let n = v.order() as i64;
        for l in 1..=n {
            let (a, b) = (v.coeff(l), v.coeff(-l));
            if (a - b.conj()).norm() > 1e-12 * (1.0 + a.norm()) {
                return Err(Error::InvalidArgument(format!(
                    "coefficients at ±{l} are not conjugate"
                )));
            }
        }
        if v.coeff(0).im.abs() > 1e-12 * (1.0 + v.coeff(0).norm()) {
            return Err(Error::InvalidArgument("mean of a real function must be real".into()));
        }
        v.real = true;
        Ok(v)
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![C64::new(0.0, 0.0); 2 * order + 1], real: true }
    }

    /// The single Fourier mode `e^{2πiℓx}`.
    pub fn mode(order: usize, l: i64) -> Self {
        let mut v = Self::zeros(order);
        v.coeffs[index(order, l)] = C64::new(1.0, 0.0);
        v.real = l == 0;
        v
    }

    pub fn order(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, l: i64) -> C64 {
        self.coeffs[index(self.order(), l)]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn as_column(&self) -> CMat {
        CMat::from_column_slice(self.coeffs.len(), 1, &self.coeffs)
    }

    pub fn from_column(col: &CMat) -> Result<Self> {
        Self::new(col.iter().copied().collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), real: self.real }
    }

    /// Evaluate the trigonometric polynomial at `x`.
    pub fn eval(&self, x: f64) -> C64 {
        let n = self.order() as i64;
        (-n..=n).map(|l| self.coeff(l) * C64::from_polar(1.0, TAU * l as f64 * x)).sum()
    }
}

/// Array position of frequency `l` in a vector of order `n`.
pub fn index(order: usize, l: i64) -> usize {
    debug_assert!(l.unsigned_abs() as usize <= order);
    (l + order as i64) as usize
}

/// Frequency stored at array position `i` in a vector of order `n`.
pub fn frequency(order: usize, i: usize) -> i64 {
    i as i64 - order as i64
}

/// Smoothness order `s` of the weight `w_s(ℓ) = 1 + (2π|ℓ|)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormOrder(pub u32);

impl NormOrder {
    pub fn weight(self, l: i64) -> f64 {
        if l == 0 {
            1.0
        } else {
            1.0 + (TAU * l.unsigned_abs() as f64).powi(self.0 as i32)
        }
    }

    /// Weights for positions `0..2n+1`.
    pub fn weights(self, order: usize) -> Vec<f64> {
        (0..2 * order + 1).map(|i| self.weight(frequency(order, i))).collect()
    }
}

/// Strong/weak norm pair of orders `k-1` and `k-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaksStructure {
    k: u32,
}

impl SaksStructure {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("smoothness k must be >= 2, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn strong(&self) -> NormOrder {
        NormOrder(self.k - 1)
    }

    pub fn weak(&self) -> NormOrder {
        NormOrder(self.k - 2)
    }
}

pub fn norm(f: &FourierVector, o: NormOrder) -> f64 {
    let n = f.order();
    f.coeffs.iter().enumerate().map(|(i, c)| o.weight(frequency(n, i)) * c.norm()).sum()
}

fn column_norm(a: &CMat, col: usize, w_out: &[f64]) -> f64 {
    a.column(col).iter().zip(w_out).map(|(z, w)| w * z.norm()).sum()
}

fn check_square_odd(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    if a.nrows() % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimension {} is not of the form 2n+1",
            a.nrows()
        )));
    }
    Ok((a.nrows() - 1) / 2)
}

/// Exact operator norm of `a` from `(C^{2n+1}, ‖·‖_input)` to `(C^{2n+1}, ‖·‖_output)`.
pub fn op_norm(a: &CMat, input: NormOrder, output: NormOrder) -> Result<f64> {
    let n = check_square_odd(a)?;
    let w_in = input.weights(n);
    let w_out = output.weights(n);
    Ok((0..a.ncols()).map(|c| column_norm(a, c, &w_out) / w_in[c]).fold(0.0, f64::max))
}

/// Strong→weak operator norm.
pub fn triple_norm(a: &CMat, s: &SaksStructure) -> Result<f64> {
    op_norm(a, s.strong(), s.weak())
}

/// `samples` random vectors with unit `o`-norm; sample `j` is drawn from a
/// generator seeded with `seed ^ j`.
pub fn random_unit_vectors(order: usize, o: NormOrder, samples: usize, seed: u64) -> Vec<FourierVector> {
    (0..samples)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ j as u64);
            let coeffs: Vec<C64> = (0..2 * order + 1).map(|_| unit_disc(&mut rng)).collect();
            let f = FourierVector { coeffs, real: false };
            let s = norm(&f, o);
            f.scaled(1.0 / s)
        })
        .collect()
}

fn apply(a: &CMat, f: &FourierVector) -> FourierVector {
    let out = a * f.as_column();
    FourierVector { coeffs: out.iter().copied().collect(), real: false }
}

/// Search grid for the Lasota–Yorke fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyGrid {
    /// Candidate contraction rates `r`.
    pub r: Vec<f64>,
    /// Candidate growth rates `R`.
    pub big_r: Vec<f64>,
    /// Candidate `C1` values, tried in ascending order.
    pub c1: Vec<f64>,
    /// Largest admissible `C2`.
    pub c2_max: f64,
}

impl LyGrid {
    pub fn at_rate(r: f64) -> Self {
        Self {
            r: vec![r],
            big_r: vec![1.0, 1.1, 1.25, 1.5, 2.0],
            c1: vec![1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0, 64.0],
            c2_max: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub power: u32,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyGridPoint {
    pub r: f64,
    pub big_r: f64,
    pub feasible: bool,
    /// Uniform constants over all powers (smallest grid `C1`, then exact `C2`).
    pub c1: f64,
    pub c2: f64,
    /// Per-power constants at this `(r, R)`.
    pub per_power: Vec<Option<PowerFit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyFit {
    pub points: Vec<LyGridPoint>,
    /// Feasible point minimising `C1 + C2`.
    pub best: Option<LyGridPoint>,
    pub violation: bool,
    pub samples: usize,
}

/// Empirical Lasota–Yorke fit `‖L^p f‖ ≤ C1 r^p ‖f‖ + C2 R^p |f|` over a set of
/// `(p, L^p)` pairs, tested on the strong-unit Fourier modes and `samples`
/// random strong-unit vectors.
pub fn ly_fit(
    powers: &[(u32, CMat)],
    s: &SaksStructure,
    grid: &LyGrid,
    samples: usize,
    seed: u64,
) -> Result<LyFit> {
    if powers.is_empty() {
        return Err(Error::Empty("matrix sequence"));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let n = check_square_odd(&powers[0].1)?;
    for (_, m) in powers {
        if m.nrows() != powers[0].1.nrows() {
            return Err(Error::DimensionMismatch { expected: powers[0].1.nrows(), found: m.nrows() });
        }
    }
    // Every Fourier mode, then random mixtures. Single modes reach the
    // directions random vectors rarely weight (the constant mode in particular).
    let mut probes: Vec<FourierVector> = (-(n as i64)..=n as i64)
        .map(|l| {
            let e = FourierVector::mode(n, l);
            let w = norm(&e, s.strong());
            e.scaled(1.0 / w)
        })
        .collect();
    probes.extend(random_unit_vectors(n, s.strong(), samples, seed));
    // (strong norm of image, weak norm of probe); probes have unit strong norm.
    let table: Vec<Vec<(f64, f64)>> = powers
        .iter()
        .map(|(_, m)| {
            probes.iter().map(|f| (norm(&apply(m, f), s.strong()), norm(f, s.weak()))).collect()
        })
        .collect();

    let mut c1_grid = grid.c1.clone();
    c1_grid.sort_by(f64::total_cmp);

    let required_c2 = |k: usize, c1: f64, r: f64, big_r: f64| -> f64 {
        let p = powers[k].0 as i32;
        table[k]
            .iter()
            .map(|&(img, weak)| (img - c1 * r.powi(p)) / (big_r.powi(p) * weak))
            .fold(0.0, f64::max)
    };

    let mut points = Vec::new();
    for &r in &grid.r {
        for &big_r in &grid.big_r {
            let per_power = (0..powers.len())
                .map(|k| {
                    c1_grid.iter().find_map(|&c1| {
                        let c2 = required_c2(k, c1, r, big_r);
                        (c2 <= grid.c2_max).then_some(PowerFit { power: powers[k].0, c1, c2 })
                    })
                })
                .collect();
            let uniform = c1_grid.iter().find_map(|&c1| {
                let c2 = (0..powers.len()).map(|k| required_c2(k, c1, r, big_r)).fold(0.0, f64::max);
                (c2 <= grid.c2_max).then_some((c1, c2))
            });
            let (feasible, c1, c2) = match uniform {
                Some((c1, c2)) => (true, c1, c2),
                None => (false, f64::NAN, f64::NAN),
            };
            points.push(LyGridPoint { r, big_r, feasible, c1, c2, per_power });
        }
    }
    let best = points
        .iter()
        .filter(|p| p.feasible)
        .min_by(|a, b| (a.c1 + a.c2).total_cmp(&(b.c1 + b.c2)))
        .cloned();
    Ok(LyFit { violation: best.is_none(), best, points, samples })
}

/// Finite-sample proxy for `liminf r_n^{1/n}`: the minimum over the supplied `(n, r_n)`.
pub fn ess_radius_bound(seq: &[(u32, f64)]) -> Result<f64> {
    if seq.is_empty() {
        return Err(Error::Empty("radius sequence"));
    }
    let mut best = f64::INFINITY;
    for &(n, r) in seq {
        if n == 0 || r < 0.0 {
            return Err(Error::InvalidArgument(format!("bad sequence entry (n = {n}, r_n = {r})")));
        }
        best = best.min(r.powf(1.0 / n as f64));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquicontEntry {
    pub eta: f64,
    pub c_eta: f64,
}

/// For each `η`, the smallest `C_η` with `|A f| ≤ η ‖f‖ + C_η |f|` over every
/// matrix and every sampled `f`.
pub fn equicont_check(
    mats: &[CMat],
    s: &SaksStructure,
    eta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<EquicontEntry>> {
    if mats.is_empty() {
        return Err(Error::Empty("matrix set"));
    }
    let n = check_square_odd(&mats[0])?;
    let probes = random_unit_vectors(n, s.strong(), samples, seed);
    let obs: Vec<(f64, f64, f64)> = mats
        .iter()
        .flat_map(|m| {
            probes.iter().map(move |f| (norm(&apply(m, f), s.weak()), norm(f, s.strong()), norm(f, s.weak())))
        })
        .collect();
    Ok(eta_grid
        .iter()
        .map(|&eta| EquicontEntry {
            eta,
            c_eta: obs.iter().map(|&(img, st, wk)| (img - eta * st) / wk).fold(0.0, f64::max),
        })
        .collect())
}
