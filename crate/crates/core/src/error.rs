use thiserror::Error;

/// Errors produced by the localization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e}, scale {scale:e})")]
    Asymmetric { asymmetry: f64, scale: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid size {0}: {1}")]
    InvalidSize(usize, &'static str),

    #[error("need at least {needed} anchors for embedding dimension {r}, got {got}")]
    TooFewAnchors { needed: usize, got: usize, r: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistent face certificate: {0}")]
    InconsistentCertificate(String),

    #[error("subproblem denominator {0:e} is too small")]
    SmallDenominator(f64),

    #[error("non-finite value encountered at iteration {iteration}: {what}")]
    NonFinite { iteration: usize, what: &'static str },

    #[error("point is infeasible for the convex model: {0}")]
    Infeasible(String),

    #[error("relative error is undefined for a source at the origin")]
    ZeroNormTruth,

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
