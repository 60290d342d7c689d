use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("mode-{mode} covariance is singular even after ridge loading {ridge:e}")]
    UnrecoverableSingularCovariance { mode: usize, ridge: f64 },

    #[error("rank {rank} invalid for mode {mode} (must lie in 1..={max})")]
    InvalidRank {
        mode: usize,
        rank: usize,
        max: usize,
    },

    #[error("probability {name} = {value} must lie strictly between 0 and 1")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("class {0} has no samples")]
    EmptyClass(u8),

    #[error("calibration set has {got} class-0 samples; at least {required} are required")]
    CalibrationSetTooSmall { got: usize, required: usize },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("repetition {rep}: {source}")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<Error>,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
