//! Monte-Carlo harness for the simulation studies.
//!
//! Each repetition `k` draws everything (signal, training data, calibration
//! data, test data, network initialization) from `RandomSource::new(seed)
//! .split(k)`, so results do not depend on how repetitions are scheduled.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{min_calibration_size, violation_rate, NpLevels};
use crate::classifiers::{
    fit_tlda, fit_tlda_np, fit_tnn, fit_tnn_np, fit_vlda, stratified_split, Method, NnArch,
    NnSettings, NpClassifier, OptimizerSettings,
};
use crate::error::{Error, Result};
use crate::estimation::{DtipSettings, LabeledSample};
use crate::numerics::RandomSource;
use crate::tensor::{DenseTensor, Shape};
use crate::tgmm::{random_tucker_signal, TgmmParams, TgmmSampler};

/// Stream id reserved for the shared signal when `fixed_signal` is set.
const SIGNAL_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Normal,
    /// Tensor t with the given degrees of freedom.
    T(u32),
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Normal => f.write_str("normal"),
            Distribution::T(dof) => write!(f, "t({dof})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Full,
    Desk,
}

impl Scale {
    pub fn reps(self) -> usize {
        match self {
            Scale::Full => 500,
            Scale::Desk => 50,
        }
    }

    pub fn n_test(self) -> usize {
        match self {
            Scale::Full => 60_000,
            Scale::Desk => 6_000,
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scale '{s}' (expected 'full' or 'desk')"
            ))),
        }
    }
}

/// Network hyperparameters as they appear in a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnConfig {
    pub tcl_ranks: Option<Vec<usize>>,
    pub tcl_layers: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub rate: f64,
    pub validation_fraction: f64,
}

impl Default for NnConfig {
    fn default() -> Self {
        let s = NnSettings::default();
        NnConfig {
            tcl_ranks: s.arch.tcl_ranks,
            tcl_layers: s.arch.tcl_layers,
            hidden: s.arch.hidden,
            epochs: s.epochs,
            batch: s.optimizer.batch_size,
            rate: s.optimizer.learning_rate,
            validation_fraction: s.validation_fraction,
        }
    }
}

impl NnConfig {
    pub fn settings(&self) -> NnSettings {
        NnSettings {
            arch: NnArch {
                tcl_ranks: self.tcl_ranks.clone(),
                tcl_layers: self.tcl_layers,
                hidden: self.hidden,
            },
            optimizer: OptimizerSettings {
                learning_rate: self.rate,
                batch_size: self.batch,
                ..OptimizerSettings::default()
            },
            epochs: self.epochs,
            validation_fraction: self.validation_fraction,
        }
    }
}

fn default_id() -> String {
    "custom".into()
}

fn default_eta() -> f64 {
    1.0
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_ridge() -> f64 {
    1e-3
}

fn default_dtip_tolerance() -> f64 {
    DtipSettings::default().epsilon
}

fn default_dtip_max_iter() -> usize {
    DtipSettings::default().max_iter
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub shape: Vec<usize>,
    /// Tucker rank of the generated signal.
    pub ranks: Vec<usize>,
    /// Rank handed to the low-rank estimator; the true rank when absent.
    #[serde(default)]
    pub working_ranks: Option<Vec<usize>>,
    pub snr: f64,
    #[serde(default)]
    pub distribution: Distribution,
    pub n_train: usize,
    /// `n_1 / n_0`, shared by training and test sets.
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub n_test: usize,
    pub reps: usize,
    pub alpha: f64,
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub nn: NnConfig,
    #[serde(default = "default_ridge")]
    pub vlda_ridge: f64,
    #[serde(default = "default_dtip_tolerance")]
    pub dtip_tolerance: f64,
    #[serde(default = "default_dtip_max_iter")]
    pub dtip_max_iter: usize,
    /// Draw one signal for all repetitions instead of one per repetition.
    #[serde(default)]
    pub fixed_signal: bool,
}

/// `(n_0, n_1)` with `n_1 = ⌊total · η/(1 + η)⌋`.
pub fn class_sizes(total: usize, eta: f64) -> (usize, usize) {
    let n1 = (total as f64 * eta / (1.0 + eta)).floor() as usize;
    let n1 = n1.min(total);
    (total - n1, n1)
}

/// `(fit, calibration)` halves of the class-0 training sample.
pub fn class0_split(n0: usize) -> (usize, usize) {
    let calib = n0 / 2;
    (n0 - calib, calib)
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

fn check_rank_list(key: &str, shape: &[usize], ranks: &[usize]) -> Result<()> {
    if ranks.len() != shape.len() {
        return Err(invalid(
            key,
            format!(
                "{} ranks given for an order-{} shape",
                ranks.len(),
                shape.len()
            ),
        ));
    }
    let total: usize = shape.iter().product();
    for (m, (&r, &d)) in ranks.iter().zip(shape).enumerate() {
        let max = d.min(total / d);
        if r == 0 || r > max {
            return Err(invalid(
                key,
                format!("rank {r} for mode {m} must lie in 1..={max}"),
            ));
        }
    }
    Ok(())
}

fn check_open_unit(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("{value} must lie strictly between 0 and 1"),
        ))
    }
}

impl ExperimentConfig {
    pub fn levels(&self) -> NpLevels {
        NpLevels {
            alpha: self.alpha,
            delta: self.delta,
        }
    }

    pub fn working_ranks(&self) -> &[usize] {
        self.working_ranks.as_deref().unwrap_or(&self.ranks)
    }

    pub fn dtip_settings(&self) -> DtipSettings {
        DtipSettings {
            epsilon: self.dtip_tolerance,
            max_iter: self.dtip_max_iter,
        }
    }

    pub fn train_sizes(&self) -> (usize, usize) {
        class_sizes(self.n_train, self.eta)
    }

    pub fn test_sizes(&self) -> (usize, usize) {
        class_sizes(self.n_test, self.eta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains([',', '"', '\n', '\r']) {
            return Err(invalid(
                "id",
                "must be non-empty without commas, quotes or newlines",
            ));
        }
        if self.shape.is_empty() || self.shape.contains(&0) {
            return Err(invalid(
                "shape",
                "dimensions must be positive and non-empty",
            ));
        }
        check_rank_list("ranks", &self.shape, &self.ranks)?;
        if let Some(w) = &self.working_ranks {
            check_rank_list("working_ranks", &self.shape, w)?;
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(invalid("snr", format!("{} must be positive", self.snr)));
        }
        if let Distribution::T(0) = self.distribution {
            return Err(invalid(
                "distribution",
                "t needs at least one degree of freedom",
            ));
        }
        check_open_unit("alpha", self.alpha)?;
        check_open_unit("delta", self.delta)?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", format!("{} must be positive", self.eta)));
        }
        if self.reps == 0 {
            return Err(invalid("reps", "at least one repetition is required"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "no methods selected"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(invalid("methods", format!("{m} listed twice")));
            }
        }
        let (t0, t1) = self.test_sizes();
        if t0 == 0 || t1 == 0 {
            return Err(invalid("n_test", "both classes need test samples"));
        }
        let (n0, n1) = self.train_sizes();
        let (fit0, calib0) = class0_split(n0);
        if fit0 == 0 || n1 == 0 {
            return Err(invalid("n_train", "both classes need training samples"));
        }
        if self.methods.iter().any(|m| m.is_np()) {
            let required = min_calibration_size(self.levels());
            if calib0 < required {
                return Err(invalid(
                    "n_train",
                    format!(
                        "{calib0} class-0 calibration samples; the NP methods need at least {required}"
                    ),
                ));
            }
        }
        if !(self.vlda_ridge >= 0.0 && self.vlda_ridge.is_finite()) {
            return Err(invalid("vlda_ridge", "must be finite and non-negative"));
        }
        if !(self.dtip_tolerance >= 0.0) || self.dtip_max_iter == 0 {
            return Err(invalid(
                "dtip_max_iter",
                "need a non-negative tolerance and at least one sweep",
            ));
        }
        if self.methods.iter().any(|m| m.is_neural()) {
            let nn = &self.nn;
            if nn.epochs == 0 {
                return Err(invalid("nn.epochs", "must be positive"));
            }
            if nn.batch == 0 {
                return Err(invalid("nn.batch", "must be positive"));
            }
            if !(nn.rate > 0.0 && nn.rate.is_finite()) {
                return Err(invalid("nn.rate", "must be positive"));
            }
            if nn.hidden == 0 || nn.tcl_layers == 0 {
                return Err(invalid(
                    "nn.hidden",
                    "need at least one hidden unit and layer",
                ));
            }
            if let Some(r) = &nn.tcl_ranks {
                if r.len() != self.shape.len() || r.contains(&0) {
                    return Err(invalid(
                        "nn.tcl_ranks",
                        "one positive rank per mode required",
                    ));
                }
            }
            check_open_unit("nn.validation_fraction", nn.validation_fraction)?;
            let smallest = fit0.min(n1) as f64;
            if (nn.validation_fraction * smallest).round() < 1.0 {
                return Err(invalid(
                    "nn.validation_fraction",
                    "leaves a class without validation samples",
                ));
            }
        }
        Ok(())
    }
}

/// One simulated data set.
#[derive(Clone, Debug)]
pub struct Instance {
    pub params: TgmmParams,
    /// Class-0 fitting half and all of class 1.
    pub train: Vec<LabeledSample>,
    /// Held-out class-0 half.
    pub calib0: Vec<DenseTensor>,
}

impl Instance {
    /// Every training observation including the calibration half.
    pub fn full_train(&self) -> Vec<LabeledSample> {
        let mut all = self.train.clone();
        all.extend(self.calib0.iter().map(|x| LabeledSample::new(x.clone(), 0)));
        all
    }
}

fn draw(
    sampler: &TgmmSampler<'_>,
    dist: Distribution,
    label: u8,
    rng: &mut RandomSource,
) -> DenseTensor {
    match dist {
        Distribution::Normal => sampler.sample(label, rng),
        Distribution::T(dof) => sampler.sample_t(label, dof, rng),
    }
}

fn model_params(config: &ExperimentConfig, signal_rng: &mut RandomSource) -> Result<TgmmParams> {
    let shape = Shape::new(config.shape.clone())?;
    let b = random_tucker_signal(&shape, &config.ranks, config.snr, signal_rng)?;
    let (n0, n1) = config.train_sizes();
    let prior1 = n1 as f64 / (n0 + n1) as f64;
    TgmmParams::with_identity_covariance(DenseTensor::zeros(shape), b, prior1)
}

/// Signal and training data for one repetition. `M_0 = 0`, `Σ_m = I`,
/// `M_1 = B` with `B` a random Tucker tensor of norm `snr`.
pub fn generate_instance(config: &ExperimentConfig, rng: &mut RandomSource) -> Result<Instance> {
    config.validate()?;
    let params = if config.fixed_signal {
        model_params(
            config,
            &mut RandomSource::new(config.seed).split(SIGNAL_STREAM),
        )?
    } else {
        model_params(config, rng)?
    };
    let sampler = TgmmSampler::new(&params)?;
    let (n0, n1) = config.train_sizes();
    let (fit0, calib0) = class0_split(n0);
    let dist = config.distribution;
    let mut train = Vec::with_capacity(fit0 + n1);
    for _ in 0..fit0 {
        train.push(LabeledSample::new(draw(&sampler, dist, 0, rng), 0));
    }
    let calib0 = (0..calib0).map(|_| draw(&sampler, dist, 0, rng)).collect();
    for _ in 0..n1 {
        train.push(LabeledSample::new(draw(&sampler, dist, 1, rng), 1));
    }
    Ok(Instance {
        params,
        train,
        calib0,
    })
}

/// Error counts on a labeled test set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub n0: usize,
    pub n1: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl Confusion {
    pub fn record(&mut self, label: u8, predicted: u8) {
        if label == 0 {
            self.n0 += 1;
            self.false_positives += usize::from(predicted == 1);
        } else {
            self.n1 += 1;
            self.false_negatives += usize::from(predicted == 0);
        }
    }

    pub fn rates(&self) -> Result<ErrorRates> {
        if self.n0 == 0 {
            return Err(Error::EmptyClass(0));
        }
        if self.n1 == 0 {
            return Err(Error::EmptyClass(1));
        }
        let type1 = self.false_positives as f64 / self.n0 as f64;
        let type2 = self.false_negatives as f64 / self.n1 as f64;
        let n = (self.n0 + self.n1) as f64;
        let accuracy = 1.0 - (self.false_positives + self.false_negatives) as f64 / n;
        let identity = 1.0 - (self.n0 as f64 * type1 + self.n1 as f64 * type2) / n;
        assert!(
            (accuracy - identity).abs() <= 1e-12,
            "accuracy identity broken: {accuracy} vs {identity}"
        );
        Ok(ErrorRates {
            type1,
            type2,
            accuracy,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRates {
    pub type1: f64,
    pub type2: f64,
    pub accuracy: f64,
}

/// Empirical type I/II error and accuracy of `classifier` on `test`.
pub fn evaluate(classifier: &NpClassifier, test: &[LabeledSample]) -> Result<ErrorRates> {
    let mut c = Confusion::default();
    for s in test {
        c.record(s.label, classifier.predict(&s.tensor)?);
    }
    c.rates()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub rates: ErrorRates,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepetitionResult {
    pub rep: usize,
    /// Base seed; together with `rep` it pins down the repetition.
    pub seed: u64,
    pub results: Vec<MethodResult>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodAggregate {
    pub method: Method,
    pub mean_type1: f64,
    pub sd_type1: f64,
    pub mean_type2: f64,
    pub sd_type2: f64,
    pub mean_acc: f64,
    pub sd_acc: f64,
    pub violation_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub repetitions: Vec<RepetitionResult>,
    pub aggregate: Vec<MethodAggregate>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-method summaries, methods in first-seen order.
pub fn aggregate(reps: &[RepetitionResult], alpha: f64) -> Result<Vec<MethodAggregate>> {
    let mut methods: Vec<Method> = Vec::new();
    for r in reps {
        for m in &r.results {
            if !methods.contains(&m.method) {
                methods.push(m.method);
            }
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let rates: Vec<ErrorRates> = reps
                .iter()
                .flat_map(|r| {
                    r.results
                        .iter()
                        .filter(|m| m.method == method)
                        .map(|m| m.rates)
                })
                .collect();
            let t1: Vec<f64> = rates.iter().map(|r| r.type1).collect();
            let t2: Vec<f64> = rates.iter().map(|r| r.type2).collect();
            let acc: Vec<f64> = rates.iter().map(|r| r.accuracy).collect();
            let (mean_type1, sd_type1) = mean_sd(&t1);
            let (mean_type2, sd_type2) = mean_sd(&t2);
            let (mean_acc, sd_acc) = mean_sd(&acc);
            Ok(MethodAggregate {
                method,
                mean_type1,
                sd_type1,
                mean_type2,
                sd_type2,
                mean_acc,
                sd_acc,
                violation_rate: violation_rate(&t1, alpha)?,
            })
        })
        .collect()
}

/// Runs repetition `rep` of `config` in isolation.
pub fn run_repetition(config: &ExperimentConfig, rep: usize) -> Result<RepetitionResult> {
    run_repetition_inner(config, rep).map_err(|e| Error::Repetition {
        rep,
        source: Box::new(e),
    })
}

fn run_repetition_inner(config: &ExperimentConfig, rep: usize) -> Result<RepetitionResult> {
    let rep_rng = RandomSource::new(config.seed).split(rep as u64);
    let inst = generate_instance(config, &mut rep_rng.split(0))?;
    let ranks = config.working_ranks();
    let dtip = config.dtip_settings();
    let levels = config.levels();
    let nn = config.nn.settings();

    let needs_full = config
        .methods
        .iter()
        .any(|m| matches!(m, Method::TLda | Method::VLda));
    let full = needs_full.then(|| inst.full_train());
    // one validation split shared by both network variants
    let nn_split = if config.methods.iter().any(|m| m.is_neural()) {
        Some(stratified_split(
            &inst.train,
            nn.validation_fraction,
            &mut rep_rng.split(2),
        )?)
    } else {
        None
    };

    let mut fitted = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let clf = match method {
            Method::TLda => fit_tlda(full.as_deref().unwrap(), ranks, dtip)?,
            Method::TLdaNp => fit_tlda_np(&inst.train, &inst.calib0, ranks, dtip, levels)?,
            Method::VLda => fit_vlda(full.as_deref().unwrap(), config.vlda_ridge)?,
            Method::TNn => {
                let (tr, va) = nn_split.as_ref().unwrap();
                let mut all = tr.clone();
                all.extend(inst.calib0.iter().map(|x| LabeledSample::new(x.clone(), 0)));
                fit_tnn(&all, va, &nn, &mut rep_rng.split(3))?
            }
            Method::TNnNp => {
                let (tr, va) = nn_split.as_ref().unwrap();
                fit_tnn_np(tr, &inst.calib0, va, &nn, levels, &mut rep_rng.split(4))?
            }
        };
        fitted.push(clf);
    }
    drop(full);
    drop(nn_split);

    // test points are streamed, never stored
    let mut test_rng = rep_rng.split(1);
    let sampler = TgmmSampler::new(&inst.params)?;
    let (t0, t1) = config.test_sizes();
    let mut counts = vec![Confusion::default(); fitted.len()];
    for i in 0..t0 + t1 {
        let label = u8::from(i >= t0);
        let x = draw(&sampler, config.distribution, label, &mut test_rng);
        for (c, clf) in counts.iter_mut().zip(&fitted) {
            c.record(label, clf.predict(&x)?);
        }
    }
    let results = fitted
        .iter()
        .zip(&counts)
        .map(|(clf, c)| {
            Ok(MethodResult {
                method: clf.method,
                rates: c.rates()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RepetitionResult {
        rep,
        seed: config.seed,
        results,
    })
}

/// All repetitions of `config` on `workers` threads (the global pool when
/// `None`). Output does not depend on the worker count.
pub fn run_experiment(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let run = || {
        (0..config.reps)
            .into_par_iter()
            .map(|k| run_repetition(config, k))
            .collect::<Result<Vec<_>>>()
    };
    let repetitions = match workers {
        Some(0) => {
            return Err(Error::InvalidArgument(
                "worker count must be positive".into(),
            ))
        }
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let aggregate = aggregate(&repetitions, config.alpha)?;
    Ok(ExperimentOutput {
        config: config.clone(),
        repetitions,
        aggregate,
    })
}

pub const EXAMPLE_NAMES: [&str; 5] = ["ex1", "ex1-imbalanced", "ex2", "ex3", "exS1"];

/// Training size for the studies whose sample size is not varied.
pub const FIXED_N_TRAIN: usize = 900;

fn base_config(id: String, scale: Scale) -> ExperimentConfig {
    ExperimentConfig {
        id,
        shape: vec![15, 15, 15],
        ranks: vec![4, 6, 3],
        working_ranks: None,
        snr: 7.0,
        distribution: Distribution::Normal,
        n_train: FIXED_N_TRAIN,
        eta: 1.0,
        n_test: scale.n_test(),
        reps: scale.reps(),
        alpha: 0.05,
        delta: 0.1,
        seed: 0,
        methods: Method::ALL.to_vec(),
        nn: NnConfig::default(),
        vlda_ridge: default_ridge(),
        dtip_tolerance: default_dtip_tolerance(),
        dtip_max_iter: default_dtip_max_iter(),
        fixed_signal: false,
    }
}

/// Configurations of a named simulation study.
pub fn example_configs(name: &str, scale: Scale) -> Result<Vec<ExperimentConfig>> {
    const SIZES: [usize; 6] = [300, 600, 900, 1200, 1500, 1800];
    let without_vlda = vec![Method::TNn, Method::TLda, Method::TNnNp, Method::TLdaNp];
    let configs = match name {
        "ex1" | "ex1-imbalanced" => {
            let eta = if name == "ex1" { 1.0 } else { 2.0 };
            SIZES
                .iter()
                .map(|&n| ExperimentConfig {
                    n_train: n,
                    eta,
                    ..base_config(format!("{name}-n{n}"), scale)
                })
                .collect()
        }
        "ex2" => (13..=18)
            .map(|d| ExperimentConfig {
                shape: vec![d; 3],
                methods: without_vlda.clone(),
                ..base_config(format!("ex2-d{d}"), scale)
            })
            .collect(),
        "ex3" => {
            let shifts: [(usize, i64); 7] =
                [(0, 0), (0, 2), (0, -2), (1, 2), (1, -2), (2, 2), (2, -2)];
            shifts
                .iter()
                .map(|&(mode, step)| {
                    let mut w = [4i64, 6, 3];
                    w[mode] += step;
                    let id = if step == 0 {
                        "ex3-true".to_string()
                    } else {
                        format!("ex3-{}{:+}", ["x", "y", "z"][mode], step)
                    };
                    ExperimentConfig {
                        working_ranks: Some(w.iter().map(|&r| r as usize).collect()),
                        methods: vec![Method::TLda, Method::TLdaNp],
                        ..base_config(id, scale)
                    }
                })
                .collect()
        }
        "exS1" => [2u32, 3, 4, 5, 10]
            .iter()
            .map(|&f| ExperimentConfig {
                distribution: Distribution::T(f),
                methods: without_vlda.clone(),
                ..base_config(format!("exS1-f{f}"), scale)
            })
            .collect(),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown example '{name}' (expected one of {})",
                EXAMPLE_NAMES.join(", ")
            )))
        }
    };
    Ok(configs)
}
