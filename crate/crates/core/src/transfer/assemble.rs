use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::maps::CircleMap;
use crate::spectral::{self, FourierVector, NormOrder};

/// Tolerance of the node-doubling quadrature self-test.
const SELF_TEST_TOL: f64 = 1e-10;

/// Matrix of a (possibly Fejér-weighted) Perron–Frobenius operator on
/// `span{e^{2πiℓx} : |ℓ| ≤ n}`; entry `(j, ℓ)` sits at `(j + n, ℓ + n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    order: usize,
    data: CMat,
    fejer: bool,
    map_id: u64,
}

impl TransferMatrix {
    pub fn from_parts(order: usize, data: CMat, fejer: bool, map_id: u64) -> Result<Self> {
        let dim = 2 * order + 1;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: data.nrows().max(data.ncols()) });
        }
        Ok(Self { order, data, fejer, map_id })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        2 * self.order + 1
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    pub fn is_fejer(&self) -> bool {
        self.fejer
    }

    pub fn map_id(&self) -> u64 {
        self.map_id
    }

    /// Entry for output frequency `j` and input frequency `l`.
    pub fn entry(&self, j: i64, l: i64) -> C64 {
        self.data[(spectral::index(self.order, j), spectral::index(self.order, l))]
    }

    /// Multiply row `j` by `1 - |j|/(n+1)`, i.e. compose with the Fejér smoother.
    pub fn fejer_weighted(&self) -> Result<TransferMatrix> {
        if self.fejer {
            return Err(Error::AlreadyWeighted);
        }
        let mut data = self.data.clone();
        for (i, mut row) in data.row_iter_mut().enumerate() {
            row *= C64::new(fejer_factor(self.order, spectral::frequency(self.order, i)), 0.0);
        }
        Ok(Self { data, fejer: true, ..*self })
    }
}

pub fn fejer_factor(order: usize, j: i64) -> f64 {
    1.0 - j.unsigned_abs() as f64 / (order as f64 + 1.0)
}

/// Smallest admissible node count for `assemble`.
pub fn min_quadrature(map: &CircleMap, order: usize) -> usize {
    let m = map.degree() as usize;
    8 * (order + m * order + m * map.max_freq() as usize)
}

/// Default node count: `max(1024, 16 n m)`, raised to the admissible floor
/// and rounded up to a power of two.
pub fn default_quadrature(map: &CircleMap, order: usize) -> usize {
    let q = 1024.max(16 * order * map.degree() as usize).max(min_quadrature(map, order));
    q.next_power_of_two()
}

fn trapezoid_rows(map: &CircleMap, order: usize, nodes: usize) -> CMat {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(nodes);
    let frac: Vec<f64> = (0..nodes).map(|q| map.lift(q as f64 / nodes as f64).rem_euclid(1.0)).collect();
    let dim = 2 * order + 1;
    let rows: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let j = spectral::frequency(order, i) as f64;
            // g(x_q) = exp(-2πi j T(x_q)); the unnormalised inverse DFT then gives
            // Σ_q g(x_q) e^{2πiℓq/Q}.
            let mut buf: Vec<C64> = frac.iter().map(|&t| C64::from_polar(1.0, -TAU * j * t)).collect();
            fft.process(&mut buf);
            (0..dim)
                .map(|c| {
                    let l = spectral::frequency(order, c);
                    buf[l.rem_euclid(nodes as i64) as usize] / nodes as f64
                })
                .collect()
        })
        .collect();
    CMat::from_fn(dim, dim, |r, c| rows[r][c])
}

/// Assemble `M_{jℓ} = ∫ e^{2πiℓx} e^{-2πij T(x)} dx` with the `Q`-node
/// trapezoid rule, after checking that `2Q` nodes agree to `1e-10`.
pub fn assemble(map: &CircleMap, order: usize, nodes: Option<usize>) -> Result<TransferMatrix> {
    let q = nodes.unwrap_or_else(|| default_quadrature(map, order));
    let floor = min_quadrature(map, order);
    if q < floor {
        return Err(Error::InvalidArgument(format!("quadrature needs at least {floor} nodes, got {q}")));
    }
    let coarse = trapezoid_rows(map, order, q);
    let fine = trapezoid_rows(map, order, 2 * q);
    let change = coarse.iter().zip(fine.iter()).fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
    if !(change <= SELF_TEST_TOL) {
        return Err(Error::QuadratureUnderresolved { change });
    }
    TransferMatrix::from_parts(order, coarse, false, map.id())
}

/// Strong→weak norm of `J_n - Id` (orders `k-1 → k-2`), in closed form.
pub fn fejer_defect(order: usize, k: u32) -> f64 {
    let (strong, weak) = (NormOrder(k - 1), NormOrder(k.saturating_sub(2)));
    let n = order as i64;
    (-n..=n)
        .map(|l| weak.weight(l) * (l.unsigned_abs() as f64 / (order as f64 + 1.0)) / strong.weight(l))
        .fold(0.0, f64::max)
}

/// Sampled lower bound for [`fejer_defect`] over a probe set.
pub fn fejer_defect_probed(order: usize, k: u32, probes: &[FourierVector]) -> Result<f64> {
    let (strong, weak) = (NormOrder(k - 1), NormOrder(k.saturating_sub(2)));
    let mut best: f64 = 0.0;
    for f in probes {
        if f.order() != order {
            return Err(Error::DimensionMismatch { expected: 2 * order + 1, found: f.coeffs().len() });
        }
        let n = order as i64;
        let diff: Vec<C64> = (-n..=n).map(|l| f.coeff(l) * (fejer_factor(order, l) - 1.0)).collect();
        let s = spectral::norm(f, strong);
        if s > 0.0 {
            best = best.max(spectral::norm(&FourierVector::new(diff)?, weak) / s);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Harmonic;
    use crate::spectral::{op_norm, random_unit_vectors};
    use std::f64::consts::PI;

    fn max_dev_from_subsampling(m: &TransferMatrix, degree: i64) -> f64 {
        let n = m.order() as i64;
        let mut worst: f64 = 0.0;
        for j in -n..=n {
            for l in -n..=n {
                let expect = if l == degree * j { 1.0 } else { 0.0 };
                worst = worst.max((m.entry(j, l) - C64::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    #[test]
    fn linear_maps_subsample() {
        for n in [1, 5, 16, 33, 64] {
            let m = assemble(&CircleMap::linear(2).unwrap(), n, None).unwrap();
            assert!(max_dev_from_subsampling(&m, 2) < 1e-12, "n = {n}");
        }
        let m = assemble(&CircleMap::linear(3).unwrap(), 2, None).unwrap();
        assert!(max_dev_from_subsampling(&m, 3) < 1e-12);
        assert!((m.entry(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quadrature_refinement() {
        let t = CircleMap::new(2, vec![Harmonic { freq: 1, amplitude: 0.1, phase: 0.0 }]).unwrap();
        let a = assemble(&t, 16, Some(1024)).unwrap();
        let b = assemble(&t, 16, Some(2048)).unwrap();
        let diff = a.matrix().iter().zip(b.matrix().iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()));
        assert!(diff <= 1e-10);
        for l in -16..=16 {
            let expect = if l == 0 { 1.0 } else { 0.0 };
            assert!((a.entry(0, l) - C64::new(expect, 0.0)).norm() <= 1e-10);
        }
        assert!(assemble(&t, 16, Some(64)).is_err());
    }

    #[test]
    fn underresolved_quadrature_is_detected() {
        // A large high-frequency harmonic needs far more nodes than the floor.
        let t = CircleMap::new(3, vec![Harmonic { freq: 8, amplitude: 5.0, phase: 0.0 }]).unwrap();
        let q = min_quadrature(&t, 16);
        assert!(matches!(assemble(&t, 16, Some(q)), Err(Error::QuadratureUnderresolved { .. })));
    }

    #[test]
    fn fejer_weights() {
        let id = TransferMatrix::from_parts(1, CMat::identity(3, 3), false, 0).unwrap();
        let w = id.fejer_weighted().unwrap();
        let diag: Vec<f64> = (0..3).map(|i| w.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.5, 1.0, 0.5]);
        assert!(matches!(w.fejer_weighted(), Err(Error::AlreadyWeighted)));

        let t = CircleMap::new(3, vec![Harmonic { freq: 2, amplitude: 0.03, phase: 1.0 }]).unwrap();
        let m = assemble(&t, 8, None).unwrap();
        let mw = m.fejer_weighted().unwrap();
        for l in -8..=8 {
            assert_eq!(m.entry(0, l), mw.entry(0, l));
        }
        let s = crate::spectral::SaksStructure::new(2).unwrap();
        let before = crate::spectral::triple_norm(m.matrix(), &s).unwrap();
        let after = crate::spectral::triple_norm(mw.matrix(), &s).unwrap();
        assert!(after <= before);
    }

    #[test]
    fn fejer_defect_closed_form() {
        assert!((fejer_defect(1, 2) - 2.0 * 0.5 / (1.0 + 2.0 * PI)).abs() < 1e-15);
        for (n, k) in [(4usize, 2u32), (9, 3), (16, 2)] {
            let dim = 2 * n + 1;
            let d = CMat::from_fn(dim, dim, |r, c| {
                if r == c {
                    C64::new(fejer_factor(n, spectral::frequency(n, r)) - 1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let via_op = op_norm(&d, NormOrder(k - 1), NormOrder(k - 2)).unwrap();
            assert!((fejer_defect(n, k) - via_op).abs() < 1e-15);
            let probes = random_unit_vectors(n, NormOrder(0), 200, 3);
            assert!(fejer_defect_probed(n, k, &probes).unwrap() <= fejer_defect(n, k) * (1.0 + 1e-12));
        }
        for n in [8usize, 16, 32, 64] {
            let ratio = fejer_defect(2 * n, 2) / fejer_defect(n, 2);
            assert!((ratio - 0.5).abs() < 0.05, "n = {n}: {ratio}");
        }
    }
}
