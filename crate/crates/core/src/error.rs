use thiserror::Error;

/// Crate-wide error type. Variants map one-to-one onto the failure modes of
/// the individual stages; [`Error::Stage`] wraps a failure with the pipeline
/// stage it occurred in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("matrix is not symmetric (max deviation {max_deviation:e})")]
    NotSymmetric { max_deviation: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("isolated node at index {index} (zero degree with a normalized Laplacian)")]
    IsolatedNode { index: usize },

    #[error("k = {k} is out of range for n = {n} samples")]
    KTooLarge { k: usize, n: usize },

    #[error("graph is disconnected (algebraic connectivity {lambda2:e})")]
    Disconnected { lambda2: f64 },

    #[error("degenerate partition: one side is empty")]
    DegeneratePartition,

    #[error("zero volume: a cut denominator vanished")]
    ZeroVolume,

    #[error("sample count mismatch: expected {expected}, got {actual}")]
    SampleCountMismatch { expected: usize, actual: usize },

    #[error("need at least two views, got {got}")]
    FewerThanTwoViews { got: usize },

    #[error("non-finite loss at epoch {epoch}; lower the learning rate")]
    NonFiniteLoss { epoch: usize },

    #[error("series of length {len} is too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("unknown point id {id}")]
    UnknownPoint { id: u64 },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("labels are degenerate: need at least one positive and one negative")]
    DegenerateLabels,

    #[error("malformed ROC curve: {0}")]
    MalformedCurve(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid value for '{name}': expected {legal}")]
    InvalidParameter { name: String, legal: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tag an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The stage tag, if this error carries one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
