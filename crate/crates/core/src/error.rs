use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series has {len} values, at least 3 are required")]
    TooShort { len: usize },

    #[error("series value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("series has zero sample variance, scaled intensity is undefined")]
    DegenerateSeries,

    #[error("lag {lag} is out of range (maximum {max})")]
    LagOutOfRange { lag: usize, max: usize },

    #[error("Chebyshev argument {0} lies outside [-1, 1]")]
    Domain(f64),

    #[error("operation requires a real-valued series")]
    ComplexUnsupported,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signal frequency {0} is outside the open interval (0, 1/2)")]
    FrequencyOutOfRange(f64),

    #[error("signal is identically zero and cannot be normalized")]
    ZeroSignal,

    #[error("length mismatch: signal has {signal} values, noise has {noise}")]
    LengthMismatch { signal: usize, noise: usize },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("row {row}: {message}")]
    Parse { row: u64, message: String },

    #[error("row {row}: non-numeric value {value:?}")]
    NonNumeric { row: u64, value: String },

    #[error("column {0} not found in header")]
    ColumnNotFound(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
