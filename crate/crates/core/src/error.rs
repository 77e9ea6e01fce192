use thiserror::Error;

/// Errors raised by the estimation library and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported dimension {0} (expected 1, 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("deployment field is empty (density x volume rounds to zero nodes)")]
    EmptyField,

    #[error("distance {distance} m is inside the reference distance {ref_distance} m")]
    NearField { distance: f64, ref_distance: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    #[error("reported location coincides with the detecting node")]
    ZeroDistance,

    #[error("insufficient observations: window needs {needed}, record holds {got}")]
    InsufficientObservations { needed: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("input format error at line {line}: {message}")]
    InputFormat { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
