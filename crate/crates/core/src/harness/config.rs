use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{CircleMap, LyClassParams, PerturbMode, Fnv};
use crate::oseledets::{FixpointOptions, QrOptions};
use crate::transfer::Driver;

/// Everything an experiment needs, read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub maps: Vec<CircleMap>,
    pub ly_params: LyClassParams,
    pub driver: Driver,
    /// Truncation order `n` (matrices are `(2n+1) x (2n+1)`).
    pub order: usize,
    /// Quadrature nodes; `None` picks a default per map.
    #[serde(default)]
    pub quadrature: Option<usize>,
    #[serde(default = "default_true")]
    pub fejer: bool,
    pub spectrum: SpectrumParams,
    #[serde(default)]
    pub splitting: SplittingParams,
    #[serde(default)]
    pub certificate: CertificateParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub ly: LyCheckParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// Averaging horizon `N`.
    pub steps: usize,
    pub d_max: usize,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_qr_warmup")]
    pub warmup: usize,
}

fn default_qr_warmup() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplittingParams {
    /// Number of leading spectral blocks to split off.
    pub blocks: usize,
    #[serde(flatten)]
    pub fixpoint: FixpointOptions,
    /// Anchor times `0, stride, 2 stride, …`.
    pub anchors: usize,
    pub stride: usize,
    /// Path length kept around the anchors for the chart iterations.
    pub margin: usize,
    /// Sweep length used to settle the reference frames.
    pub frame_warmup: usize,
}

impl Default for SplittingParams {
    fn default() -> Self {
        Self { blocks: 1, fixpoint: FixpointOptions::default(), anchors: 8, stride: 50, margin: 400, frame_warmup: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateParams {
    pub horizon: usize,
    pub warmup: usize,
    /// Refuse to run sweeps when the reference certificate fails.
    pub require: bool,
}

impl Default for CertificateParams {
    fn default() -> Self {
        Self { horizon: 20, warmup: 100, require: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub eps: Vec<f64>,
    pub mode: PerturbMode,
    pub orders: Vec<usize>,
    pub n_ref: Option<usize>,
    /// Number of leading exponents compared; `None` means one past the
    /// largest split dimension.
    pub compare: Option<usize>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { eps: Vec::new(), mode: PerturbMode::NewHarmonic(1), orders: Vec::new(), n_ref: None, compare: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyCheckParams {
    pub max_power: u32,
    pub samples: usize,
    /// Also fit products along the sampled path.
    pub path_products: bool,
}

impl Default for LyCheckParams {
    fn default() -> Self {
        Self { max_power: 8, samples: 200, path_products: true }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Structural checks and map validation; any failure is a configuration error.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.maps.is_empty() {
            return bad("no maps given".into());
        }
        self.ly_params.check().map_err(|e| Error::Config(e.to_string()))?;
        self.driver.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(&f) = self.driver.fibers.iter().find(|&&f| f >= self.maps.len()) {
            return bad(format!("driver refers to map {f} but only {} maps given", self.maps.len()));
        }
        if self.order == 0 {
            return bad("order must be >= 1".into());
        }
        let dim = 2 * self.order + 1;
        if self.spectrum.steps == 0 || self.spectrum.d_max == 0 || self.spectrum.d_max > dim {
            return bad(format!("spectrum needs steps >= 1 and d_max in [1, {dim}]"));
        }
        if self.splitting.anchors == 0 {
            return bad("at least one anchor time is needed".into());
        }
        if self.certificate.horizon == 0 {
            return bad("certificate horizon must be >= 1".into());
        }
        for (i, m) in self.maps.iter().enumerate() {
            let v = m.validate(&self.ly_params, m.default_grid())?;
            if !v.ok {
                return bad(format!(
                    "map {i} is outside the class: inf |T'| = {}, C^k bound = {}",
                    v.inf_deriv, v.ck_bound
                ));
            }
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// FNV-1a of the canonical JSON form.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.write(serde_json::to_string(self).expect("config serializes").as_bytes());
        h.finish()
    }

    pub fn qr_options(&self) -> QrOptions {
        QrOptions { tau: self.spectrum.tau, ..QrOptions::new(self.spectrum.steps, self.spectrum.d_max) }
            .with_warmup(self.spectrum.warmup)
            .with_seed(derive_seed(self.seed, "qr", 0))
    }

    pub fn anchor_times(&self) -> Vec<i64> {
        (0..self.splitting.anchors).map(|a| (a * self.splitting.stride) as i64).collect()
    }

    /// Path window `(backward, forward)` covering QR, chart iterations,
    /// frame sweeps and certificate horizons.
    pub fn window(&self) -> (usize, usize) {
        let s = &self.splitting;
        let last_anchor = (s.anchors - 1) * s.stride + 1;
        let back = self.spectrum.warmup.max(s.margin + s.frame_warmup);
        let fwd = self
            .spectrum
            .steps
            .max(last_anchor + s.margin + s.frame_warmup)
            .max(last_anchor + self.certificate.horizon + self.certificate.warmup);
        (back, fwd)
    }
}

/// Seed for one named stream of randomness.
pub fn derive_seed(seed: u64, stream: &str, index: u64) -> u64 {
    let mut h = Fnv::new();
    h.write(&seed.to_le_bytes());
    h.write(stream.as_bytes());
    h.write(&index.to_le_bytes());
    h.finish()
}
