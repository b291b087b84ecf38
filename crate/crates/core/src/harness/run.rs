use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::ModuleMetric;
use crate::linalg::CMat;
use crate::maps::CircleMap;
use crate::oseledets::{
    hyperbolicity_certificate, oseledets_projection, qr_spectrum, splitting_at, FrameField, HyperbolicityCertificate,
    LyapunovSpectrum, SplittingState, SplittingSummary,
};
use crate::spectral::{NormOrder, SaksStructure, WEIGHT_RULE};
use crate::transfer::{assemble, Cocycle, CocyclePath};

use super::config::{derive_seed, ExperimentConfig};

/// Fourier-coordinate matrices of `maps` at `order` (Fejér-weighted if asked).
pub fn fiber_matrices(maps: &[CircleMap], order: usize, quadrature: Option<usize>, fejer: bool) -> Result<Vec<CMat>> {
    maps.iter()
        .map(|m| {
            let a = assemble(m, order, quadrature)?;
            Ok(if fejer { a.fejer_weighted()?.into_matrix() } else { a.into_matrix() })
        })
        .collect()
}

pub fn build_path(cfg: &ExperimentConfig) -> Result<CocyclePath> {
    let (back, fwd) = cfg.window();
    CocyclePath::sample(&cfg.driver, back, fwd)
}

/// Spectrum, splittings, Oseledets projections and certificate of one cocycle.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub order: usize,
    pub metric: ModuleMetric,
    /// Fiber matrices in Fourier coordinates.
    pub matrices: Vec<CMat>,
    /// The cocycle in module coordinates (weighted inner product made Euclidean).
    pub cocycle: Cocycle,
    pub spectrum: LyapunovSpectrum,
    /// Fast dimensions of the computed splittings.
    pub dims: Vec<usize>,
    pub frames: Vec<FrameField>,
    /// `splittings[i][a]`: split `i` at anchor `a`.
    pub splittings: Vec<Vec<SplittingState>>,
    /// `projections[i][a]`: Oseledets projection of block `i + 1` at anchor
    /// `a`, in Fourier coordinates.
    pub projections: Vec<Vec<CMat>>,
    pub certificate: HyperbolicityCertificate,
}

impl Analysis {
    pub fn saks(&self, cfg: &ExperimentConfig) -> SaksStructure {
        SaksStructure::new(cfg.ly_params.k).expect("validated class parameters")
    }
}

/// Split dimensions from the leading `blocks` spectral blocks.
pub fn split_dims(spectrum: &LyapunovSpectrum, blocks: usize, dim: usize) -> Result<Vec<usize>> {
    let all = spectrum.block_dims();
    let dims: Vec<usize> = all.into_iter().take(blocks).filter(|&d| d < dim).collect();
    if dims.is_empty() {
        return Err(Error::Config("no proper split: the leading blocks fill the space".into()));
    }
    Ok(dims)
}

/// Full analysis of `maps` at `order` on `path`. With `reference` given, its
/// split dimensions and frame fields are reused (perturbed runs are charted
/// against the unperturbed frames); otherwise frames are swept from this
/// cocycle.
pub fn analyze(
    cfg: &ExperimentConfig,
    maps: &[CircleMap],
    order: usize,
    path: &CocyclePath,
    reference: Option<&Analysis>,
) -> Result<Analysis> {
    let metric = ModuleMetric::new(order, NormOrder(cfg.ly_params.k - 1));
    let matrices = fiber_matrices(maps, order, cfg.quadrature, cfg.fejer)?;
    let module: Vec<CMat> = matrices.iter().map(|m| metric.to_module(m)).collect();
    let cocycle = Cocycle::new(path.clone(), module)?;
    let dim = cocycle.dim();
    let mut qr = cfg.qr_options();
    qr.d_max = qr.d_max.min(dim);
    let spectrum = qr_spectrum(&cocycle, &qr)?;

    let (dims, frames) = match reference {
        Some(r) => (r.dims.clone(), r.frames.clone()),
        None => {
            let dims = split_dims(&spectrum, cfg.splitting.blocks, dim)?;
            let s = &cfg.splitting;
            let anchors = cfg.anchor_times();
            let lo = anchors[0] - s.margin as i64;
            let hi = anchors[anchors.len() - 1] + 1 + s.margin as i64;
            let frames = dims
                .iter()
                .map(|&d| FrameField::swept(&cocycle, d, lo, hi, s.frame_warmup, derive_seed(cfg.seed, "frames", d as u64)))
                .collect::<Result<Vec<_>>>()?;
            (dims, frames)
        }
    };

    let anchors = cfg.anchor_times();
    let opts = cfg.splitting.fixpoint;
    let splittings = dims
        .iter()
        .zip(&frames)
        .map(|(&d, field)| anchors.par_iter().map(|&t| splitting_at(&cocycle, t, d, field, &opts)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let projections = (0..dims.len())
        .map(|i| {
            (0..anchors.len())
                .map(|a| {
                    let nested: Vec<SplittingState> = splittings.iter().map(|s| s[a].clone()).collect();
                    Ok(metric.from_module(&oseledets_projection(&nested, i + 1)?.matrix))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let certificate = hyperbolicity_certificate(&cocycle, &spectrum, &splittings, cfg.certificate.horizon, cfg.certificate.warmup)?;
    Ok(Analysis { order, metric, matrices, cocycle, spectrum, dims, frames, splittings, projections, certificate })
}

/// The unperturbed run every sweep is measured against.
#[derive(Debug, Clone)]
pub struct Reference {
    pub config: ExperimentConfig,
    pub path: CocyclePath,
    pub analysis: Analysis,
}

/// Compute the reference analysis; fails with [`Error::CertificateFailed`]
/// when the configuration requires a hyperbolic reference and the
/// certificate does not pass.
pub fn run_reference(cfg: &ExperimentConfig) -> Result<Reference> {
    cfg.validate()?;
    let path = build_path(cfg)?;
    let analysis = analyze(cfg, &cfg.maps, cfg.order, &path, None)?;
    if cfg.certificate.require && !analysis.certificate.pass {
        return Err(Error::CertificateFailed);
    }
    Ok(Reference { config: cfg.clone(), path, analysis })
}

/// Provenance attached to every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub verb: String,
    pub strong_order: u32,
    pub weak_order: u32,
    pub weight_rule: String,
    pub inner_product: String,
    pub order: usize,
    pub fejer: bool,
    pub seed: u64,
    pub driver_seed: u64,
    pub qr_seed: u64,
    pub config_hash: String,
    pub anchors: Vec<i64>,
}

impl Metadata {
    pub fn new(verb: &str, cfg: &ExperimentConfig) -> Self {
        let saks = SaksStructure::new(cfg.ly_params.k).expect("validated class parameters");
        let metric = ModuleMetric::new(cfg.order, saks.strong());
        Metadata {
            verb: verb.to_string(),
            strong_order: saks.strong().0,
            weak_order: saks.weak().0,
            weight_rule: WEIGHT_RULE.to_string(),
            inner_product: metric.describe(),
            order: cfg.order,
            fejer: cfg.fejer,
            seed: cfg.seed,
            driver_seed: cfg.driver.seed,
            qr_seed: cfg.qr_options().seed,
            config_hash: format!("{:016x}", cfg.hash()),
            anchors: cfg.anchor_times(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub metadata: Metadata,
    pub spectrum: LyapunovSpectrum,
    pub dims: Vec<usize>,
    pub splittings: Vec<Vec<SplittingSummary>>,
    pub certificate: HyperbolicityCertificate,
    pub map_ids: Vec<String>,
}

impl Reference {
    pub fn report(&self, verb: &str) -> ReferenceReport {
        let a = &self.analysis;
        ReferenceReport {
            metadata: Metadata::new(verb, &self.config),
            spectrum: a.spectrum.clone(),
            dims: a.dims.clone(),
            splittings: a.splittings.iter().map(|s| s.iter().map(|x| x.summary()).collect()).collect(),
            certificate: a.certificate.clone(),
            map_ids: self.config.maps.iter().map(|m| format!("{:016x}", m.id())).collect(),
        }
    }
}
