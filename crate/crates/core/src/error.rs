use thiserror::Error;

/// Errors raised across the simulator and analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("shape mismatch: expected {expected} samples, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids ({left} vs {right} points per axis)")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up at t = {t}: {quantity} = {value}")]
    BlowUp {
        t: f64,
        quantity: &'static str,
        value: f64,
    },

    #[error("records are not sorted by time (index {index})")]
    Unsorted { index: usize },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
