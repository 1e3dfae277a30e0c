use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("index {index} out of range for dimension {len}")]
    IndexError { index: usize, len: usize },

    #[error("cannot sample from a vector or matrix with zero norm")]
    ZeroNormSample,

    #[error("duplicate matrix entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("estimator produced a non-finite sample")]
    NonfiniteSample,

    #[error("rejection sampling gave up after {cap} trials")]
    IterationCapExceeded { cap: u64 },

    #[error("sketch is rank deficient: sigma_{k} = {sigma_k:e} <= threshold {threshold:e}")]
    RankDeficientSketch {
        k: usize,
        sigma_k: f64,
        threshold: f64,
    },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("estimator for component {component} failed: {source}")]
    EstimatorFailure {
        component: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("solution is numerically zero: {quantity} = {value:e} below threshold {threshold:e}")]
    ZeroSolution {
        quantity: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("dense decomposition did not converge")]
    NoConvergence,

    #[error("matrix is not Hermitian positive semidefinite (defect {defect:e})")]
    NotPsd { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("transpose trees were not built for this matrix")]
    TransposeUnavailable,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn index(index: usize, len: usize) -> Self {
        Error::IndexError { index, len }
    }
}
