use thiserror::Error;

/// Error type shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an argument precondition (bad fraction, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Tensor or parameter shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Input is degenerate for the requested statistic (constant series, single-class labels).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Malformed or inconsistent data encountered while reading/writing files.
    #[error("data error: {0}")]
    Data(String),

    /// An internal contract was broken (stale trace, mismatched cache).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Training diverged or produced non-finite numbers.
    #[error("training failure at epoch {epoch}, batch {batch}: {message}")]
    Training {
        epoch: usize,
        batch: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
