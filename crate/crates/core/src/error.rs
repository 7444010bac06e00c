use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where a segment came from; attached to errors raised during batch extraction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub source: String,
    pub segment: usize,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.source, self.segment)
    }
}

/// Coarse error category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Ingestion,
    Degenerate,
    Config,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("signal too short: {len} samples (minimum {min})")]
    TooShort { len: usize, min: usize },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("degenerate distribution: IEFD entropy is zero")]
    DegenerateDistribution,

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("{provenance}: {source}")]
    Segment {
        provenance: Provenance,
        #[source]
        source: Box<Error>,
    },

    #[error("ingestion error in {path}: {message}")]
    Ingestion { path: PathBuf, message: String },

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn with_provenance(self, provenance: Provenance) -> Self {
        Error::Segment {
            provenance,
            source: Box::new(self),
        }
    }

    /// True for errors caused by numerically degenerate segments (dropped during batch runs).
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::Degenerate(_) | Error::DegenerateDistribution => true,
            Error::Segment { source, .. } => source.is_degenerate(),
            _ => false,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Segment { source, .. } => source.kind(),
            Error::Degenerate(_) | Error::DegenerateDistribution | Error::EmptyDataset(_) => {
                ErrorKind::Degenerate
            }
            Error::Ingestion { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_) => {
                ErrorKind::Ingestion
            }
            Error::ModelFormat(_) => ErrorKind::Ingestion,
            Error::InvalidInput(_)
            | Error::TooShort { .. }
            | Error::InvalidLength(_)
            | Error::Stratification(_)
            | Error::Config(_)
            | Error::Training(_)
            | Error::Evaluation(_) => ErrorKind::Config,
        }
    }
}
