//! Fitted classifiers: a scoring function paired with a threshold.

mod lda;
mod tnn;
mod vlda;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::NpLevels;
use crate::error::{Error, Result};
use crate::tensor::{inner, DenseTensor, Shape};

pub use lda::{fit_tlda, fit_tlda_np, tlda_threshold};
pub use tnn::{
    fit_tnn, fit_tnn_np, stratified_split, Adam, NnArch, NnSettings, OptimizerSettings, TclNetwork,
};
pub use vlda::fit_vlda;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "T-LDA")]
    TLda,
    #[serde(rename = "T-LDA-NP")]
    TLdaNp,
    #[serde(rename = "V-LDA")]
    VLda,
    #[serde(rename = "T-NN")]
    TNn,
    #[serde(rename = "T-NN-NP")]
    TNnNp,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::TNn,
        Method::TLda,
        Method::VLda,
        Method::TNnNp,
        Method::TLdaNp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::TLda => "T-LDA",
            Method::TLdaNp => "T-LDA-NP",
            Method::VLda => "V-LDA",
            Method::TNn => "T-NN",
            Method::TNnNp => "T-NN-NP",
        }
    }

    pub fn is_np(self) -> bool {
        matches!(self, Method::TLdaNp | Method::TNnNp)
    }

    pub fn is_neural(self) -> bool {
        matches!(self, Method::TNn | Method::TNnNp)
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Method::TLda => 1,
            Method::TLdaNp => 2,
            Method::VLda => 3,
            Method::TNn => 4,
            Method::TNnNp => 5,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// Offset-free linear score `⟨X, weights⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearScorer {
    pub weights: DenseTensor,
}

impl LinearScorer {
    pub fn score(&self, x: &DenseTensor) -> Result<f64> {
        inner(x, &self.weights)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scorer {
    Linear(LinearScorer),
    /// Network output `h_θ(X)` used directly as the score.
    Network(TclNetwork),
}

impl Scorer {
    pub fn score(&self, x: &DenseTensor) -> Result<f64> {
        match self {
            Scorer::Linear(s) => s.score(x),
            Scorer::Network(n) => n.forward(x),
        }
    }

    pub fn input_shape(&self) -> &Shape {
        match self {
            Scorer::Linear(s) => s.weights.shape(),
            Scorer::Network(n) => n.input_shape(),
        }
    }
}

/// Whether a score equal to the threshold is classified as 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `1{s > C}`.
    Strict,
    /// `1{s ≥ C}`, the plug-in Fisher rule.
    Inclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NpClassifier {
    pub method: Method,
    pub scorer: Scorer,
    pub threshold: f64,
    /// Present for the calibrated variants.
    pub levels: Option<NpLevels>,
}

impl NpClassifier {
    pub fn boundary(&self) -> Boundary {
        match self.method {
            Method::TLda | Method::VLda => Boundary::Inclusive,
            _ => Boundary::Strict,
        }
    }

    pub fn score(&self, x: &DenseTensor) -> Result<f64> {
        self.scorer.score(x)
    }

    pub fn decide(&self, score: f64) -> u8 {
        let fire = match self.boundary() {
            Boundary::Strict => score > self.threshold,
            Boundary::Inclusive => score >= self.threshold,
        };
        u8::from(fire)
    }

    pub fn predict(&self, x: &DenseTensor) -> Result<u8> {
        Ok(self.decide(self.score(x)?))
    }
}
