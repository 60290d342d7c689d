use std::fmt;

use tnp_core::Error;

/// A command failure together with its process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2: bad arguments, configuration or input files.
    Input(String),
    /// Exit 1: the computation itself failed.
    Runtime(String),
    /// Exit 3: too few class-0 samples to calibrate.
    Calibration(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Input(_) => 2,
            Failure::Calibration(_) => 3,
        }
    }

    pub fn input(context: impl fmt::Display, e: impl fmt::Display) -> Failure {
        Failure::Input(format!("{context}: {e}"))
    }

    pub fn runtime(context: impl fmt::Display, e: impl fmt::Display) -> Failure {
        Failure::Runtime(format!("{context}: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Runtime(m) | Failure::Calibration(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CalibrationSetTooSmall { .. } => Failure::Calibration(e.to_string()),
            Error::InvalidShape(_)
            | Error::ShapeMismatch { .. }
            | Error::ModeOutOfRange { .. }
            | Error::InvalidRank { .. }
            | Error::InvalidProbability { .. }
            | Error::EmptyClass(_)
            | Error::InvalidConfig { .. }
            | Error::Format(_)
            | Error::InvalidArgument(_) => Failure::Input(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}
