//! Expanding circle maps with trigonometric-polynomial lifts
//!
//! `T(x) = m·x + Σ_j a_j sin(2π j x + φ_j)  (mod 1)`
//!
//! Every derivative is available in closed form, which gives exact
//! derivative oracles for class validation and `C^r` distances.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of grid points for sup-norm evaluation.
pub const DEFAULT_GRID: usize = 4096;

/// One term `a sin(2π j x + φ)`, serialized as `[j, a, phi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, f64, f64)", into = "(u32, f64, f64)")]
pub struct Harmonic {
    pub freq: u32,
    pub amplitude: f64,
    pub phase: f64,
}

impl From<(u32, f64, f64)> for Harmonic {
    fn from((freq, amplitude, phase): (u32, f64, f64)) -> Self {
        Self { freq, amplitude, phase }
    }
}

impl From<Harmonic> for (u32, f64, f64) {
    fn from(h: Harmonic) -> Self {
        (h.freq, h.amplitude, h.phase)
    }
}

impl Harmonic {
    fn derivative(&self, x: f64, p: u32) -> f64 {
        let w = TAU * self.freq as f64;
        let arg = w * x + self.phase;
        let v = match p % 4 {
            0 => arg.sin(),
            1 => arg.cos(),
            2 => -arg.sin(),
            _ => -arg.cos(),
        };
        self.amplitude * w.powi(p as i32) * v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawMap {
    degree: u32,
    #[serde(default)]
    harmonics: Vec<Harmonic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct CircleMap {
    degree: u32,
    harmonics: Vec<Harmonic>,
}

impl TryFrom<RawMap> for CircleMap {
    type Error = Error;
    fn try_from(raw: RawMap) -> Result<Self> {
        CircleMap::new(raw.degree, raw.harmonics)
    }
}

impl From<CircleMap> for RawMap {
    fn from(m: CircleMap) -> Self {
        RawMap { degree: m.degree, harmonics: m.harmonics }
    }
}

/// Parameters `(k, α, K)` of the class `LY_k(α, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyClassParams {
    pub k: u32,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
}

impl LyClassParams {
    pub fn new(k: u32, alpha: f64, big_k: f64) -> Result<Self> {
        let p = Self { k, alpha, big_k };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.k < 2 || !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.big_k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "class parameters need k >= 2, alpha in (0,1), K > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub ok: bool,
    pub inf_deriv: f64,
    pub ck_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    /// Rescale the existing harmonics.
    Amplitude,
    /// Rotate the phases of the existing harmonics (tangent direction).
    Phase,
    /// Add a new harmonic of the given frequency with a seeded phase.
    NewHarmonic(u32),
}

impl CircleMap {
    pub fn new(degree: u32, harmonics: Vec<Harmonic>) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument(format!("degree must be >= 2, got {degree}")));
        }
        if harmonics.iter().any(|h| h.freq == 0 || !h.amplitude.is_finite() || !h.phase.is_finite()) {
            return Err(Error::InvalidArgument("harmonics need j >= 1 and finite a, phi".into()));
        }
        Ok(Self { degree, harmonics })
    }

    pub fn linear(degree: u32) -> Result<Self> {
        Self::new(degree, Vec::new())
    }

    /// Random map with `count` harmonics of frequency `1..=max_freq`, scaled
    /// so that `Σ |a_j| 2πj ≤ slack`, hence `inf T' ≥ m - slack`.
    pub fn random<R: Rng + ?Sized>(degree: u32, count: usize, max_freq: u32, slack: f64, rng: &mut R) -> Result<Self> {
        let mut hs: Vec<Harmonic> = (0..count)
            .map(|_| Harmonic {
                freq: rng.gen_range(1..=max_freq.max(1)),
                amplitude: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..TAU),
            })
            .collect();
        let size: f64 = hs.iter().map(|h| h.amplitude.abs() * TAU * h.freq as f64).sum();
        if size > 0.0 {
            let scale = slack * rng.gen_range(0.2..1.0) / size;
            for h in &mut hs {
                h.amplitude *= scale;
            }
        }
        Self::new(degree, hs)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn max_freq(&self) -> u32 {
        self.harmonics.iter().map(|h| h.freq).max().unwrap_or(0)
    }

    /// Grid size that resolves the sup norms of this map's derivatives.
    pub fn default_grid(&self) -> usize {
        DEFAULT_GRID.max(16 * self.max_freq() as usize)
    }

    /// Value of the lift `m x + Σ a sin(…)` (not reduced mod 1).
    pub fn lift(&self, x: f64) -> f64 {
        self.degree as f64 * x + self.harmonics.iter().map(|h| h.derivative(x, 0)).sum::<f64>()
    }

    /// `p = 0`: `T(x) mod 1`; `p ≥ 1`: the `p`-th derivative of the lift.
    pub fn eval(&self, x: f64, p: u32) -> f64 {
        match p {
            0 => self.lift(x).rem_euclid(1.0),
            _ => {
                let lin = if p == 1 { self.degree as f64 } else { 0.0 };
                lin + self.harmonics.iter().map(|h| h.derivative(x, p)).sum::<f64>()
            }
        }
    }

    /// Periodic part `Σ a sin(…)` of the `p`-th derivative.
    fn periodic_part(&self, x: f64, p: u32) -> f64 {
        self.harmonics.iter().map(|h| h.derivative(x, p)).sum()
    }

    /// Stable 64-bit identifier (FNV-1a over the bit patterns of the parameters).
    pub fn id(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(&self.degree.to_le_bytes());
        for hm in &self.harmonics {
            h.write(&hm.freq.to_le_bytes());
            h.write(&hm.amplitude.to_bits().to_le_bytes());
            h.write(&hm.phase.to_bits().to_le_bytes());
        }
        h.finish()
    }

    /// Grid check of membership in `LY_k(α, K)`.
    pub fn validate(&self, params: &LyClassParams, grid: usize) -> Result<Validation> {
        params.check()?;
        if grid < 64 {
            return Err(Error::InvalidArgument(format!("validation grid must be >= 64, got {grid}")));
        }
        let mut inf_deriv = f64::INFINITY;
        let mut ck_bound: f64 = 0.0;
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            for p in 0..=params.k {
                let v = self.eval(x, p).abs();
                ck_bound = ck_bound.max(v);
                if p == 1 {
                    inf_deriv = inf_deriv.min(v);
                }
            }
        }
        let ok = inf_deriv >= 1.0 / params.alpha && ck_bound <= params.big_k;
        Ok(Validation { ok, inf_deriv, ck_bound })
    }

    /// Grid `C^r` distance between lifts; infinite for different degrees.
    pub fn ck_distance(&self, other: &CircleMap, r: u32, grid: usize) -> f64 {
        if self.degree != other.degree {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            for p in 0..=r {
                d = d.max((self.periodic_part(x, p) - other.periodic_part(x, p)).abs());
            }
        }
        d
    }

    /// A map at `C^{k-1}` distance `ε` from `self` in the direction picked by
    /// `mode`, validated against `params`.
    pub fn perturb(&self, eps: f64, mode: PerturbMode, seed: u64, params: &LyClassParams) -> Result<CircleMap> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("perturbation size must be >= 0, got {eps}")));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let direction: Vec<Harmonic> = match mode {
            PerturbMode::Amplitude | PerturbMode::Phase if self.harmonics.is_empty() => {
                return Err(Error::InvalidArgument(format!("{mode:?} perturbation needs existing harmonics")));
            }
            PerturbMode::Amplitude => {
                self.harmonics.iter().map(|h| Harmonic { amplitude: sign * h.amplitude, ..*h }).collect()
            }
            PerturbMode::Phase => self
                .harmonics
                .iter()
                .map(|h| Harmonic { amplitude: sign * h.amplitude, phase: h.phase + FRAC_PI_2, ..*h })
                .collect(),
            PerturbMode::NewHarmonic(j) => {
                if j == 0 {
                    return Err(Error::InvalidArgument("new harmonic frequency must be >= 1".into()));
                }
                vec![Harmonic { freq: j, amplitude: 1.0, phase: rng.gen_range(0.0..TAU) }]
            }
        };
        let probe = CircleMap { degree: self.degree, harmonics: direction.clone() };
        let grid = self.default_grid().max(probe.default_grid());
        let size = probe.ck_distance(&CircleMap { degree: self.degree, harmonics: vec![] }, params.k - 1, grid);
        if !(size > 0.0) {
            return Err(Error::InvalidArgument("perturbation direction vanishes".into()));
        }
        let delta = eps / size;
        let mut harmonics = self.harmonics.clone();
        harmonics.extend(direction.into_iter().map(|h| Harmonic { amplitude: delta * h.amplitude, ..h }));
        let out = CircleMap::new(self.degree, harmonics)?;
        let v = out.validate(params, grid)?;
        if !v.ok {
            return Err(Error::PerturbationLeavesClass { inf_deriv: v.inf_deriv, ck_bound: v.ck_bound });
        }
        Ok(out)
    }
}

/// 64-bit FNV-1a.
pub(crate) struct Fnv(u64);

impl Fnv {
    pub fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= *b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sine(m: u32, a: f64, j: u32) -> CircleMap {
        CircleMap::new(m, vec![Harmonic { freq: j, amplitude: a, phase: 0.0 }]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let t = CircleMap::linear(2).unwrap();
        assert_eq!(t.eval(0.3, 1), 2.0);
        let t = sine(2, 0.1, 1);
        assert!((t.eval(0.0, 1) - (2.0 + 0.2 * PI)).abs() < 1e-15);
        // second derivative against central differences of the first
        let h = 1e-5;
        let fd = (t.eval(0.25 + h, 1) - t.eval(0.25 - h, 1)) / (2.0 * h);
        assert!((t.eval(0.25, 2) - fd).abs() < 1e-6);
        assert!((t.eval(0.25, 2) + 0.4 * PI * PI).abs() < 1e-12);
        assert!((0.0..1.0).contains(&t.eval(0.9, 0)));
    }

    #[test]
    fn validate_examples() {
        let p = LyClassParams::new(2, 0.5, 10.0).unwrap();
        let v = CircleMap::linear(2).unwrap().validate(&p, 256).unwrap();
        assert!(v.ok);
        assert_eq!(v.inf_deriv, 2.0);
        let v = sine(2, 0.3, 1).validate(&p, 256).unwrap();
        assert!(!v.ok);
        let p = LyClassParams::new(2, 1.0 / 2.3, 20.0).unwrap();
        let v = sine(3, 0.05, 2).validate(&p, 4096).unwrap();
        assert!(v.ok);
        assert!((v.inf_deriv - (3.0 - 0.2 * PI)).abs() < 1e-6);
        assert!(sine(3, 0.05, 2).validate(&p, 32).is_err());
    }

    #[test]
    fn distance_examples() {
        let t = CircleMap::linear(2).unwrap();
        assert_eq!(t.ck_distance(&t, 3, 512), 0.0);
        let eps = 1e-3;
        let s = sine(2, eps, 1);
        assert!((t.ck_distance(&s, 1, 4096) - 2.0 * PI * eps).abs() < 1e-15);
        assert_eq!(t.ck_distance(&CircleMap::linear(3).unwrap(), 1, 64), f64::INFINITY);
    }

    #[test]
    fn perturb_examples() {
        let p = LyClassParams::new(2, 0.5, 10.0).unwrap();
        let t = CircleMap::linear(2).unwrap();
        assert_eq!(t.perturb(0.0, PerturbMode::NewHarmonic(1), 1, &p).unwrap(), t);
        // A degree-3 base leaves room for a C^1-small harmonic.
        let t3 = CircleMap::linear(3).unwrap();
        let eps = 0.05;
        let s = t3.perturb(eps, PerturbMode::NewHarmonic(1), 4, &p).unwrap();
        let h = s.harmonics()[0];
        assert!((h.amplitude * 2.0 * PI - eps).abs() < 1e-5 * eps);
        let grid = s.default_grid();
        assert!((t3.ck_distance(&s, 1, grid) - eps).abs() < 1e-12 * eps);
        assert!(matches!(
            t.perturb(1.0, PerturbMode::NewHarmonic(1), 4, &p),
            Err(Error::PerturbationLeavesClass { .. })
        ));
        assert!(t.perturb(0.1, PerturbMode::Amplitude, 1, &p).is_err());
    }

    #[test]
    fn perturbation_distance_is_linear() {
        let p = LyClassParams::new(3, 0.4, 200.0).unwrap();
        let t = CircleMap::new(3, vec![Harmonic { freq: 1, amplitude: 0.02, phase: 0.3 }, Harmonic { freq: 3, amplitude: 0.005, phase: 1.0 }]).unwrap();
        for mode in [PerturbMode::Amplitude, PerturbMode::Phase, PerturbMode::NewHarmonic(2)] {
            let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&e| t.ck_distance(&t.perturb(e, mode, 9, &p).unwrap(), 2, t.default_grid()) / e)
                .collect();
            for r in &ratios {
                assert!((r / ratios[0] - 1.0).abs() < 1e-9, "{mode:?}: {ratios:?}");
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let text = r#"{"degree":3,"harmonics":[[1,0.1,0.30000000000000004],[4,-0.0123456789012345,2.5]]}"#;
        let m: CircleMap = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), text);
        assert!(serde_json::from_str::<CircleMap>(r#"{"degree":1,"harmonics":[]}"#).is_err());
    }

    proptest! {
        #[test]
        fn distance_is_pseudometric(s1 in 0u64..200, s2 in 0u64..200, s3 in 0u64..200) {
            let mk = |s: u64| CircleMap::random(3, 3, 4, 0.5, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
            let (a, b, c) = (mk(s1), mk(s2), mk(s3));
            let d = |x: &CircleMap, y: &CircleMap| x.ck_distance(y, 2, 512);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        }

        #[test]
        fn validate_is_monotone(seed in 0u64..200, da in 0.0f64..0.3, dk in 0.0f64..50.0) {
            let m = CircleMap::random(3, 2, 3, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let p = LyClassParams::new(2, 0.45, 40.0).unwrap();
            let q = LyClassParams::new(2, (0.45 + da).min(0.99), 40.0 + dk).unwrap();
            if m.validate(&p, 512).unwrap().ok {
                prop_assert!(m.validate(&q, 512).unwrap().ok);
            }
        }
    }
}
