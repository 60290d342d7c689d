//! Neyman–Pearson classification for tensor-valued data.
//!
//! The crate covers the tensor-normal discriminant model and its oracle rule,
//! Tucker low-rank estimation of the discriminant tensor, a tensor-contraction
//! neural scorer, distribution-free order-statistic threshold calibration, and
//! a Monte-Carlo harness for simulation studies.

// `!(x > 0.0)` range checks are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod classifiers;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod io;
pub mod numerics;
pub mod tensor;
pub mod tgmm;

pub use calibration::{CalibrationResult, NpLevels};
pub use classifiers::{Method, NpClassifier, Scorer};
pub use error::{Error, Result};
pub use estimation::{LabeledSample, LdaEstimates};
pub use numerics::{RandomSource, SpdMatrix};
pub use tensor::{DenseTensor, Matrix, Shape, TuckerFactors};
pub use tgmm::{OracleRule, TgmmParams};
