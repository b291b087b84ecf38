use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{mat_pow, CMat};
use crate::spectral::{ly_fit, LyFit, LyGrid, PowerFit, SaksStructure};
use crate::transfer::Cocycle;

use super::config::{derive_seed, ExperimentConfig};
use super::run::{build_path, fiber_matrices, run_reference, Metadata, ReferenceReport};

/// Lasota–Yorke fit of one sequence of matrix powers or products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyLine {
    /// `fiber <i>` or `path`.
    pub label: String,
    pub pass: bool,
    /// Uniform constants over all powers at the best `R`.
    pub c1: f64,
    pub c2: f64,
    pub big_r: f64,
    pub per_power: Vec<Option<PowerFit>>,
}

impl LyLine {
    fn from_fit(label: String, fit: &LyFit) -> Self {
        match &fit.best {
            Some(p) => LyLine { label, pass: true, c1: p.c1, c2: p.c2, big_r: p.big_r, per_power: p.per_power.clone() },
            None => LyLine {
                label,
                pass: false,
                c1: f64::NAN,
                c2: f64::NAN,
                big_r: f64::NAN,
                per_power: fit.points.first().map(|p| p.per_power.clone()).unwrap_or_default(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyReport {
    pub metadata: Metadata,
    /// Contraction rate `α^{k-1}` the fit is held to.
    pub r: f64,
    pub max_power: u32,
    pub samples: usize,
    pub lines: Vec<LyLine>,
    pub pass: bool,
}

/// Fit `‖M^p f‖ ≤ C1 r^p ‖f‖ + C2 R^p |f|` with `r = α^{k-1}` for every fiber
/// matrix and (optionally) for products along the sampled path, `p ≤ max_power`.
pub fn check_ly(cfg: &ExperimentConfig) -> Result<LyReport> {
    cfg.validate()?;
    let saks = SaksStructure::new(cfg.ly_params.k)?;
    let r = cfg.ly_params.alpha.powi(cfg.ly_params.k as i32 - 1);
    let grid = LyGrid::at_rate(r);
    let p_max = cfg.ly.max_power;
    let mats = fiber_matrices(&cfg.maps, cfg.order, cfg.quadrature, cfg.fejer)?;
    let fit = |label: String, powers: Vec<(u32, CMat)>, stream: u64| -> Result<LyLine> {
        let f = ly_fit(&powers, &saks, &grid, cfg.ly.samples, derive_seed(cfg.seed, "ly", stream))?;
        Ok(LyLine::from_fit(label, &f))
    };
    let mut lines = Vec::new();
    for (i, m) in mats.iter().enumerate() {
        let powers = (1..=p_max).map(|p| (p, mat_pow(m, p))).collect();
        lines.push(fit(format!("fiber {i}"), powers, i as u64)?);
    }
    if cfg.ly.path_products {
        let cocycle = Cocycle::new(build_path(cfg)?, mats)?;
        let powers = (1..=p_max).map(|p| Ok((p, cocycle.product(0, p as usize)?))).collect::<Result<Vec<_>>>()?;
        lines.push(fit("path".into(), powers, u64::MAX)?);
    }
    let pass = lines.iter().all(|l| l.pass);
    Ok(LyReport { metadata: Metadata::new("check-ly", cfg), r, max_power: p_max, samples: cfg.ly.samples, lines, pass })
}

/// Reference run reduced to its certificate verdict.
pub fn check_hyperbolic(cfg: &ExperimentConfig) -> Result<ReferenceReport> {
    Ok(run_reference(cfg)?.report("check-hyperbolic"))
}
