//! Tensor-contraction network: one or more Tucker-style contraction layers
//! `X ↦ X ×_1 V_1 ⋯ ×_M V_M`, a ReLU hidden layer and a sigmoid output.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::calibration::{min_calibration_size, umbrella_threshold, NpLevels};
use crate::error::{Error, Result};
use crate::estimation::{common_shape, LabeledSample};
use crate::numerics::RandomSource;
use crate::tensor::{mode_product, multi_mode_product, unfold, DenseTensor, Matrix, Shape};

use super::{Method, NpClassifier, Scorer};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnArch {
    /// Output size of each contracted mode; `min(8, d_m)` when absent.
    pub tcl_ranks: Option<Vec<usize>>,
    /// Number of stacked contraction layers. Layers after the first map
    /// `R_m → R_m`.
    pub tcl_layers: usize,
    pub hidden: usize,
}

impl Default for NnArch {
    fn default() -> Self {
        NnArch {
            tcl_ranks: None,
            tcl_layers: 1,
            hidden: 64,
        }
    }
}

impl NnArch {
    pub fn resolve_ranks(&self, input: &Shape) -> Result<Vec<usize>> {
        let ranks = match &self.tcl_ranks {
            Some(r) => r.clone(),
            None => input.dims().iter().map(|&d| d.min(8)).collect(),
        };
        if ranks.len() != input.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} contraction ranks for an order-{} input",
                ranks.len(),
                input.order()
            )));
        }
        if ranks.contains(&0) {
            return Err(Error::InvalidArgument(
                "contraction ranks must be positive".into(),
            ));
        }
        Ok(ranks)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnSettings {
    pub arch: NnArch,
    pub optimizer: OptimizerSettings,
    pub epochs: usize,
    /// Share of each class held out for epoch selection.
    pub validation_fraction: f64,
}

impl Default for NnSettings {
    fn default() -> Self {
        NnSettings {
            arch: NnArch::default(),
            optimizer: OptimizerSettings::default(),
            epochs: 100,
            validation_fraction: 0.2,
        }
    }
}

/// Structured view of the parameter vector, also used for gradients.
#[derive(Clone, Debug)]
struct Parts {
    tcl: Vec<Vec<Matrix>>,
    wh: Matrix,
    bh: DVector<f64>,
    wout: DVector<f64>,
    bout: f64,
}

impl Parts {
    fn flatten_into(&self, out: &mut Vec<f64>) {
        out.clear();
        for layer in &self.tcl {
            for v in layer {
                out.extend_from_slice(v.as_slice());
            }
        }
        out.extend_from_slice(self.wh.as_slice());
        out.extend_from_slice(self.bh.as_slice());
        out.extend_from_slice(self.wout.as_slice());
        out.push(self.bout);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TclNetwork {
    input: Shape,
    ranks: Vec<usize>,
    layers: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl TclNetwork {
    /// Glorot-uniform weights, zero biases.
    pub fn new(input: Shape, arch: &NnArch, rng: &mut RandomSource) -> Result<Self> {
        let ranks = arch.resolve_ranks(&input)?;
        if arch.tcl_layers == 0 || arch.hidden == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one contraction layer and one hidden unit".into(),
            ));
        }
        let mut net = TclNetwork {
            input,
            ranks,
            layers: arch.tcl_layers,
            hidden: arch.hidden,
            params: Vec::new(),
        };
        let mut params = Vec::with_capacity(net.param_count());
        let mut glorot = |rows: usize, cols: usize, params: &mut Vec<f64>| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            params.extend((0..rows * cols).map(|_| a * (2.0 * rng.uniform() - 1.0)));
        };
        for l in 0..net.layers {
            for m in 0..net.input.order() {
                glorot(net.ranks[m], net.layer_in_dim(l, m), &mut params);
            }
        }
        glorot(net.hidden, net.contracted_len(), &mut params);
        params.extend(std::iter::repeat_n(0.0, net.hidden));
        glorot(1, net.hidden, &mut params);
        params.push(0.0);
        net.params = params;
        Ok(net)
    }

    pub fn from_parameters(
        input: Shape,
        ranks: Vec<usize>,
        layers: usize,
        hidden: usize,
        params: Vec<f64>,
    ) -> Result<Self> {
        let arch = NnArch {
            tcl_ranks: Some(ranks),
            tcl_layers: layers,
            hidden,
        };
        let ranks = arch.resolve_ranks(&input)?;
        if layers == 0 || hidden == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one contraction layer and one hidden unit".into(),
            ));
        }
        let net = TclNetwork {
            input,
            ranks,
            layers,
            hidden,
            params,
        };
        if net.params.len() != net.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} network parameters, got {}",
                net.param_count(),
                net.params.len()
            )));
        }
        Ok(net)
    }

    pub fn input_shape(&self) -> &Shape {
        &self.input
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} network parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    fn layer_in_dim(&self, layer: usize, mode: usize) -> usize {
        if layer == 0 {
            self.input.dim(mode)
        } else {
            self.ranks[mode]
        }
    }

    fn contracted_len(&self) -> usize {
        self.ranks.iter().product()
    }

    pub fn param_count(&self) -> usize {
        let tcl: usize = (0..self.layers)
            .map(|l| {
                (0..self.input.order())
                    .map(|m| self.ranks[m] * self.layer_in_dim(l, m))
                    .sum::<usize>()
            })
            .sum();
        tcl + self.hidden * self.contracted_len() + 2 * self.hidden + 1
    }

    fn unpack(&self) -> Parts {
        let mut at = 0;
        let mut take = |rows: usize, cols: usize| {
            let m = Matrix::from_column_slice(rows, cols, &self.params[at..at + rows * cols]);
            at += rows * cols;
            m
        };
        let tcl = (0..self.layers)
            .map(|l| {
                (0..self.input.order())
                    .map(|m| take(self.ranks[m], self.layer_in_dim(l, m)))
                    .collect()
            })
            .collect();
        let wh = take(self.hidden, self.contracted_len());
        let bh = take(self.hidden, 1).column(0).into_owned();
        let wout = take(self.hidden, 1).column(0).into_owned();
        let bout = take(1, 1)[(0, 0)];
        Parts {
            tcl,
            wh,
            bh,
            wout,
            bout,
        }
    }

    fn zero_parts(&self) -> Parts {
        Parts {
            tcl: (0..self.layers)
                .map(|l| {
                    (0..self.input.order())
                        .map(|m| Matrix::zeros(self.ranks[m], self.layer_in_dim(l, m)))
                        .collect()
                })
                .collect(),
            wh: Matrix::zeros(self.hidden, self.contracted_len()),
            bh: DVector::zeros(self.hidden),
            wout: DVector::zeros(self.hidden),
            bout: 0.0,
        }
    }

    fn check_input(&self, x: &DenseTensor) -> Result<()> {
        if x.shape() != &self.input {
            return Err(Error::ShapeMismatch {
                expected: self.input.dims().to_vec(),
                found: x.shape().dims().to_vec(),
            });
        }
        Ok(())
    }

    /// Activations after each contraction layer, input first.
    fn contract(parts: &Parts, x: &DenseTensor) -> Result<Vec<DenseTensor>> {
        let mut acts = Vec::with_capacity(parts.tcl.len() + 1);
        acts.push(x.clone());
        for layer in &parts.tcl {
            let maps: Vec<Option<&Matrix>> = layer.iter().map(Some).collect();
            let next = multi_mode_product(acts.last().unwrap(), &maps)?;
            acts.push(next);
        }
        Ok(acts)
    }

    fn logit_with(parts: &Parts, x: &DenseTensor) -> Result<f64> {
        let acts = Self::contract(parts, x)?;
        let z = DVector::from_column_slice(acts.last().unwrap().data());
        let a = &parts.wh * z + &parts.bh;
        let h = a.map(|v| v.max(0.0));
        Ok(parts.wout.dot(&h) + parts.bout)
    }

    /// Pre-sigmoid output.
    pub fn logit(&self, x: &DenseTensor) -> Result<f64> {
        self.check_input(x)?;
        Self::logit_with(&self.unpack(), x)
    }

    /// `h_θ(X) ∈ (0, 1)`.
    pub fn forward(&self, x: &DenseTensor) -> Result<f64> {
        Ok(sigmoid(self.logit(x)?))
    }

    pub fn forward_batch(&self, xs: &[DenseTensor]) -> Result<Vec<f64>> {
        let parts = self.unpack();
        xs.iter()
            .map(|x| {
                self.check_input(x)?;
                Ok(sigmoid(Self::logit_with(&parts, x)?))
            })
            .collect()
    }

    /// Mean binary cross-entropy over `batch` and its gradient with respect to
    /// [`parameters`](Self::parameters).
    pub fn loss_and_gradient(&self, batch: &[&LabeledSample]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let parts = self.unpack();
        let n = batch.len();
        let p = self.contracted_len();
        let mut all_acts = Vec::with_capacity(n);
        let mut z = Matrix::zeros(p, n);
        for (j, s) in batch.iter().enumerate() {
            self.check_input(&s.tensor)?;
            let acts = Self::contract(&parts, &s.tensor)?;
            z.column_mut(j).copy_from_slice(acts.last().unwrap().data());
            all_acts.push(acts);
        }
        let mut a = &parts.wh * &z;
        for mut col in a.column_iter_mut() {
            col += &parts.bh;
        }
        let h = a.map(|v| v.max(0.0));
        let logits = h.tr_mul(&parts.wout).add_scalar(parts.bout);

        let mut loss = 0.0;
        let mut d_out = DVector::zeros(n);
        for (j, s) in batch.iter().enumerate() {
            let o = logits[j];
            let y = f64::from(s.label);
            // softplus(o) − y·o
            loss += o.max(0.0) + (-o.abs()).exp().ln_1p() - y * o;
            d_out[j] = (sigmoid(o) - y) / n as f64;
        }
        loss /= n as f64;

        let mut g = self.zero_parts();
        g.wout = &h * &d_out;
        g.bout = d_out.sum();
        let mut da = &parts.wout * d_out.transpose();
        da.zip_apply(&a, |d, pre| {
            if pre <= 0.0 {
                *d = 0.0
            }
        });
        g.wh = &da * z.transpose();
        g.bh = da.column_sum();
        let dz = parts.wh.tr_mul(&da);

        let top = self.layers;
        for (j, acts) in all_acts.iter().enumerate() {
            let mut upstream =
                DenseTensor::new(acts[top].shape().clone(), dz.column(j).as_slice().to_vec())?;
            for l in (0..top).rev() {
                let layer = &parts.tcl[l];
                let input = &acts[l];
                for m in 0..layer.len() {
                    let maps: Vec<Option<&Matrix>> = layer
                        .iter()
                        .enumerate()
                        .map(|(k, v)| (k != m).then_some(v))
                        .collect();
                    let partial = multi_mode_product(input, &maps)?;
                    let gu = unfold(&upstream, m)?;
                    let pu = unfold(&partial, m)?;
                    g.tcl[l][m].gemm(1.0, &gu, &pu.transpose(), 1.0);
                }
                if l > 0 {
                    let mut back = upstream;
                    for (m, v) in layer.iter().enumerate() {
                        back = mode_product(&back, &v.transpose(), m)?;
                    }
                    upstream = back;
                }
            }
        }
        let mut flat = Vec::with_capacity(self.params.len());
        g.flatten_into(&mut flat);
        Ok((loss, flat))
    }

    /// Mean binary cross-entropy without the gradient.
    pub fn loss(&self, batch: &[&LabeledSample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let parts = self.unpack();
        let mut total = 0.0;
        for s in batch {
            self.check_input(&s.tensor)?;
            let o = Self::logit_with(&parts, &s.tensor)?;
            total += o.max(0.0) + (-o.abs()).exp().ln_1p() - f64::from(s.label) * o;
        }
        Ok(total / batch.len() as f64)
    }

    /// Share of `data` with `1{h_θ(X) > 1/2}` equal to the label.
    pub fn accuracy(&self, data: &[LabeledSample]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("accuracy of an empty set".into()));
        }
        let parts = self.unpack();
        let mut correct = 0usize;
        for s in data {
            self.check_input(&s.tensor)?;
            let pred = u8::from(sigmoid(Self::logit_with(&parts, &s.tensor)?) > 0.5);
            correct += usize::from(pred == s.label);
        }
        Ok(correct as f64 / data.len() as f64)
    }
}

fn sigmoid(o: f64) -> f64 {
    if o >= 0.0 {
        1.0 / (1.0 + (-o).exp())
    } else {
        let e = o.exp();
        e / (1.0 + e)
    }
}

/// Bias-corrected Adam.
#[derive(Clone, Debug)]
pub struct Adam {
    settings: OptimizerSettings,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(settings: OptimizerSettings, len: usize) -> Self {
        Adam {
            settings,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let OptimizerSettings {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            ..
        } = self.settings;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= learning_rate * (*m / c1) / ((*v / c2).sqrt() + epsilon);
        }
    }
}

/// Splits each class so that `round(fraction · n_y)` of its samples go to the
/// second (validation) part.
pub fn stratified_split(
    data: &[LabeledSample],
    fraction: f64,
    rng: &mut RandomSource,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "validation fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut val = Vec::new();
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data[i].label == label)
            .collect();
        rng.shuffle(&mut idx);
        let k = (fraction * idx.len() as f64).round() as usize;
        val.extend(idx[..k].iter().map(|&i| data[i].clone()));
        train.extend(idx[k..].iter().map(|&i| data[i].clone()));
    }
    Ok((train, val))
}

fn train_network(
    train: &[LabeledSample],
    val: &[LabeledSample],
    settings: &NnSettings,
    rng: &mut RandomSource,
) -> Result<TclNetwork> {
    let shape = common_shape(train)?;
    if val.is_empty() {
        return Err(Error::InvalidArgument("validation set is empty".into()));
    }
    if settings.epochs == 0 || settings.optimizer.batch_size == 0 {
        return Err(Error::InvalidArgument(
            "training needs at least one epoch and a positive batch size".into(),
        ));
    }
    let mut net = TclNetwork::new(shape, &settings.arch, rng)?;
    let mut adam = Adam::new(settings.optimizer, net.param_count());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut params = net.params.clone();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..settings.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(settings.optimizer.batch_size) {
            let batch: Vec<&LabeledSample> = chunk.iter().map(|&i| &train[i]).collect();
            let (_, grad) = net.loss_and_gradient(&batch)?;
            adam.step(&mut params, &grad);
            net.params.copy_from_slice(&params);
        }
        let acc = net.accuracy(val)?;
        // ties keep the earlier epoch
        if best.as_ref().is_none_or(|(b, _)| acc > *b) {
            best = Some((acc, params.clone()));
        }
    }
    let (_, chosen) = best.expect("at least one epoch ran");
    net.params = chosen;
    Ok(net)
}

/// T-NN: network trained on `train` with the epoch chosen on `val`,
/// classifying by `1{h_θ(X) > 1/2}`.
pub fn fit_tnn(
    train: &[LabeledSample],
    val: &[LabeledSample],
    settings: &NnSettings,
    rng: &mut RandomSource,
) -> Result<NpClassifier> {
    let net = train_network(train, val, settings, rng)?;
    Ok(NpClassifier {
        method: Method::TNn,
        scorer: Scorer::Network(net),
        threshold: 0.5,
        levels: None,
    })
}

/// T-NN-NP: the network output used as a score, thresholded on the held-out
/// class-0 set `calib0`.
pub fn fit_tnn_np(
    train: &[LabeledSample],
    calib0: &[DenseTensor],
    val: &[LabeledSample],
    settings: &NnSettings,
    levels: NpLevels,
    rng: &mut RandomSource,
) -> Result<NpClassifier> {
    levels.validate()?;
    let required = min_calibration_size(levels);
    if calib0.len() < required {
        return Err(Error::CalibrationSetTooSmall {
            got: calib0.len(),
            required,
        });
    }
    let net = train_network(train, val, settings, rng)?;
    let scores = net.forward_batch(calib0)?;
    let cal = umbrella_threshold(&scores, levels)?;
    Ok(NpClassifier {
        method: Method::TNnNp,
        scorer: Scorer::Network(net),
        threshold: cal.threshold,
        levels: Some(levels),
    })
}
