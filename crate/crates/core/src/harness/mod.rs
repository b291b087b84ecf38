//! Experiment orchestration: configuration, the reference run, the
//! perturbation and Fejér-order sweeps, the Lasota–Yorke check and output.

pub mod check;
pub mod config;
pub mod emit;
pub mod run;
pub mod sweep;

pub use check::{check_hyperbolic, check_ly, LyLine, LyReport};
pub use config::{derive_seed, CertificateParams, ExperimentConfig, LyCheckParams, SplittingParams, SpectrumParams, SweepParams};
pub use emit::{csv_header, to_json, write_csv, OutputDir, Timing};
pub use run::{analyze, build_path, fiber_matrices, run_reference, Analysis, Metadata, Reference, ReferenceReport};
pub use sweep::{
    pad_matrix, perturbed_maps, spearman, sweep_fejer, sweep_perturbation, sweep_perturbation_from, DefectStep, FejerSummary,
    FejerSweep, PerturbationSummary, PerturbationSweep, ReferenceDigest, SweepRecord,
};

use crate::error::Error;

/// Process exit code for an error: 2 for configuration problems, 4 for a
/// required certificate that failed, 3 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::InvalidArgument(_) => 2,
        Error::CertificateFailed => 4,
        _ => 3,
    }
}
