use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("point ({x}, {y}) lies on the curve")]
    PointOnCurve { x: f64, y: f64 },

    #[error("word of length {len} exceeds oracle limit {max}")]
    WordTooLong { len: usize, max: usize },

    #[error("window length {length} exceeds series duration {duration}")]
    WindowTooLong { length: f64, duration: f64 },

    #[error("lag {lag} out of range for series of {samples} samples")]
    LagOutOfRange { lag: i64, samples: usize },

    #[error("singular least-squares fit: {0}")]
    SingularFit(String),

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("csv error at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("csv error: {0}")]
    CsvFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
