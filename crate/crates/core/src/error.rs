use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("quadrature under-resolved: doubling the node count moved an entry by {change:e}")]
    QuadratureUnderresolved { change: f64 },

    #[error("matrix already carries Fejér weights")]
    AlreadyWeighted,

    #[error("perturbed map leaves the class (inf |S'| = {inf_deriv}, C^k bound = {ck_bound})")]
    PerturbationLeavesClass { inf_deriv: f64, ck_bound: f64 },

    #[error("time {t} outside path window [{lo}, {hi}]")]
    WindowViolation { t: i64, lo: i64, hi: i64 },

    #[error("subspaces are not complementary (smallest singular value {sigma_min:e})")]
    NotComplementary { sigma_min: f64 },

    #[error("subspace is not transverse to the chart kernel (smallest singular value {sigma_min:e})")]
    NotTransverse { sigma_min: f64 },

    #[error("graph transform is singular (smallest singular value {sigma_min:e})")]
    TransformSingular { sigma_min: f64 },

    #[error("graph chart was built against a different frame")]
    FrameMismatch,

    #[error("rank collapse: numerical rank {rank} < {expected}")]
    RankCollapse { rank: usize, expected: usize },

    #[error("degenerate cocycle: {0}")]
    DegenerateCocycle(String),

    #[error("no contraction after {iterations} iterations (last ratio {ratio})")]
    NoContraction { iterations: usize, ratio: f64 },

    #[error("degenerate block at t = {t}: zero volume")]
    DegenerateBlock { t: i64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("hyperbolicity certificate required but failed")]
    CertificateFailed,

    #[error("bad container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
