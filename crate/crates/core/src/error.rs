use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("degenerate basis: vector {index} is linearly dependent on its predecessors")]
    DegenerateBasis { index: usize },

    #[error("ill-conditioned matrix (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank-deficient channel: singular value {index} is {value:e}")]
    RankDeficient { index: usize, value: f64 },

    #[error("sampler width {width} is below the threshold {threshold}")]
    WidthTooSmall { width: f64, threshold: f64 },

    #[error("dimension {dim} exceeds the enumeration limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("search space of {size:e} candidates exceeds the limit {limit:e}")]
    SearchSpaceTooLarge { size: f64, limit: f64 },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error("search failed: no verified solution after {attempts} oracle calls")]
    SearchFailure { attempts: usize },

    #[error("reduction failed at coordinate {coordinate}: {reason}")]
    ReductionFailure { coordinate: usize, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
