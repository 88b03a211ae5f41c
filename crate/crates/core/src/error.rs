use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no edges")]
    EmptyGraph,

    #[error("temporal split requires a timestamp on every edge ({missing} edges lack one)")]
    MissingTimestamp { missing: usize },

    #[error("invalid split ratios: {0}")]
    InvalidRatio(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node not found: {0}")]
    NotFound(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid scores: {0}")]
    InvalidScores(String),

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
