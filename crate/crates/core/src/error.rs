use thiserror::Error;

/// Errors raised across the model, data, and fitting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or run configuration (bad thresholds, unknown names, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse such as a vector of the wrong length.
    #[error("usage error: {0}")]
    Usage(String),

    /// Missing or inconsistent data (missing politeness cell, empty dataset, ...).
    #[error("data error: {0}")]
    Data(String),

    /// One or more CSV rows failed validation.
    #[error("failed to load {path}: {} invalid row(s)\n{}", .problems.len(), .problems.join("\n"))]
    Load { path: String, problems: Vec<String> },

    /// The optimizer could not produce a finite result.
    #[error("optimization error: {0}")]
    Optimization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Usage(_) | Error::Data(_) | Error::Load { .. } | Error::Csv(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
