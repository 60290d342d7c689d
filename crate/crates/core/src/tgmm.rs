//! The two-class tensor-normal mixture: parameters, samplers and the closed
//! form oracle Neyman–Pearson rule.
//!
//! Under class `y` a sample is `M_y + Z ×_1 L_1 .. ×_M L_M` with `Z` i.i.d.
//! standard normal and `L_m L_mᵀ = Σ_m`, so `vec(X) ~ N(vec(M_y), Σ_M ⊗ .. ⊗ Σ_1)`.
//! The oracle discriminant is `B = (M_1 − M_0) ×_m Σ_m^{-1}` and the score
//! `⟨X, B⟩` is normal with variance `Δ² = ⟨B, M_1 − M_0⟩` under either class.

use crate::error::{Error, Result};
use crate::numerics::{
    cholesky, invert_spd, std_normal_cdf, std_normal_quantile, RandomSource, SpdMatrix,
};
use crate::tensor::{
    inner, multi_mode_product, tucker_reconstruct, DenseTensor, Matrix, Shape, TuckerFactors,
};

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TgmmParams {
    pub mean0: DenseTensor,
    pub mean1: DenseTensor,
    pub covariances: Vec<SpdMatrix>,
    /// `π_1`; `π_0 = 1 − π_1`.
    pub prior1: f64,
}

impl TgmmParams {
    pub fn new(
        mean0: DenseTensor,
        mean1: DenseTensor,
        covariances: Vec<SpdMatrix>,
        prior1: f64,
    ) -> Result<Self> {
        if mean0.shape() != mean1.shape() {
            return Err(Error::ShapeMismatch {
                expected: mean0.shape().dims().to_vec(),
                found: mean1.shape().dims().to_vec(),
            });
        }
        if covariances.len() != mean0.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariances for an order-{} model",
                covariances.len(),
                mean0.order()
            )));
        }
        for (m, cov) in covariances.iter().enumerate() {
            if cov.order() != mean0.shape().dim(m) {
                return Err(Error::DimensionMismatch(format!(
                    "covariance {m} has order {} but mode {m} has size {}",
                    cov.order(),
                    mean0.shape().dim(m)
                )));
            }
        }
        check_probability("prior1", prior1)?;
        Ok(TgmmParams {
            mean0,
            mean1,
            covariances,
            prior1,
        })
    }

    /// Model with `Σ_m = I` on every mode.
    pub fn with_identity_covariance(
        mean0: DenseTensor,
        mean1: DenseTensor,
        prior1: f64,
    ) -> Result<Self> {
        let covariances = mean0
            .shape()
            .dims()
            .iter()
            .map(|&d| SpdMatrix::identity(d))
            .collect();
        Self::new(mean0, mean1, covariances, prior1)
    }

    pub fn shape(&self) -> &Shape {
        self.mean0.shape()
    }

    pub fn prior0(&self) -> f64 {
        1.0 - self.prior1
    }

    pub fn mean(&self, label: u8) -> &DenseTensor {
        if label == 0 {
            &self.mean0
        } else {
            &self.mean1
        }
    }

    /// `D = M_1 − M_0`.
    pub fn mean_difference(&self) -> DenseTensor {
        self.mean1.sub(&self.mean0).expect("means share a shape")
    }
}

/// Pre-factored sampler; identity covariance factors are skipped.
#[derive(Clone, Debug)]
pub struct TgmmSampler<'a> {
    params: &'a TgmmParams,
    factors: Vec<Option<Matrix>>,
}

impl<'a> TgmmSampler<'a> {
    pub fn new(params: &'a TgmmParams) -> Result<Self> {
        let mut factors = Vec::with_capacity(params.covariances.len());
        for cov in &params.covariances {
            let l = cholesky(cov)?;
            let n = l.nrows();
            factors.push(if l == Matrix::identity(n, n) {
                None
            } else {
                Some(l)
            });
        }
        Ok(TgmmSampler { params, factors })
    }

    /// Zero-mean tensor-normal draw with the model's covariance.
    pub fn noise(&self, rng: &mut RandomSource) -> DenseTensor {
        let shape = self.params.shape().clone();
        let mut z = DenseTensor::zeros(shape);
        rng.fill_standard_normal(z.data_mut());
        if self.factors.iter().all(Option::is_none) {
            return z;
        }
        let maps: Vec<Option<&Matrix>> = self.factors.iter().map(Option::as_ref).collect();
        multi_mode_product(&z, &maps).expect("factors conform to the shape")
    }

    pub fn sample(&self, label: u8, rng: &mut RandomSource) -> DenseTensor {
        let mut x = self.noise(rng);
        x.axpy(1.0, self.params.mean(label)).expect("same shape");
        x
    }

    /// Tensor-t draw: `M_y + Z' √(f/W)` with one `W ~ χ²_f` per sample.
    pub fn sample_t(&self, label: u8, dof: u32, rng: &mut RandomSource) -> DenseTensor {
        let z = self.noise(rng);
        let w = rng.chi_square(dof);
        let mut x = z.scale((dof as f64 / w).sqrt());
        x.axpy(1.0, self.params.mean(label)).expect("same shape");
        x
    }
}

fn check_label(label: u8) -> Result<()> {
    if label <= 1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "label must be 0 or 1, got {label}"
        )))
    }
}

pub fn sample_class(
    params: &TgmmParams,
    label: u8,
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<DenseTensor>> {
    check_label(label)?;
    let sampler = TgmmSampler::new(params)?;
    Ok((0..n).map(|_| sampler.sample(label, rng)).collect())
}

pub fn sample_class_t(
    params: &TgmmParams,
    dof: u32,
    label: u8,
    n: usize,
    rng: &mut RandomSource,
) -> Result<Vec<DenseTensor>> {
    check_label(label)?;
    if dof == 0 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be ≥ 1".into(),
        ));
    }
    let sampler = TgmmSampler::new(params)?;
    Ok((0..n).map(|_| sampler.sample_t(label, dof, rng)).collect())
}

/// `B = (M_1 − M_0) ×_m Σ_m^{-1}`.
pub fn discriminant_tensor(params: &TgmmParams) -> Result<DenseTensor> {
    let inverses = params
        .covariances
        .iter()
        .map(|c| invert_spd(c).map(SpdMatrix::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<Option<&Matrix>> = inverses.iter().map(Some).collect();
    multi_mode_product(&params.mean_difference(), &maps)
}

/// Closed-form NP oracle `1{⟨X, B⟩ > C}` at level `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRule {
    pub discriminant: DenseTensor,
    /// `Δ = √⟨B, D⟩`.
    pub snr: f64,
    /// `(M_0 + M_1)/2`.
    pub mid_mean: DenseTensor,
    pub threshold: f64,
    pub alpha: f64,
}

impl OracleRule {
    pub fn score(&self, x: &DenseTensor) -> Result<f64> {
        inner(x, &self.discriminant)
    }

    pub fn predict(&self, x: &DenseTensor) -> Result<u8> {
        Ok(u8::from(self.score(x)? > self.threshold))
    }
}

/// Upper `α` quantile `Φ^{-1}(1 − α)`, evaluated as `−Φ^{-1}(α)`.
pub(crate) fn upper_quantile(alpha: f64) -> Result<f64> {
    Ok(-std_normal_quantile(alpha)?)
}

pub fn oracle_rule(params: &TgmmParams, alpha: f64) -> Result<OracleRule> {
    check_probability("alpha", alpha)?;
    let discriminant = discriminant_tensor(params)?;
    let d = params.mean_difference();
    let snr_sq = inner(&discriminant, &d)?;
    if !(snr_sq > 0.0) {
        return Err(Error::InvalidArgument(
            "class means coincide; the oracle rule is undefined".into(),
        ));
    }
    let snr = snr_sq.sqrt();
    let threshold = snr * upper_quantile(alpha)? + inner(&discriminant, &params.mean0)?;
    let mid_mean = params.mean0.add(&params.mean1)?.scale(0.5);
    Ok(OracleRule {
        discriminant,
        snr,
        mid_mean,
        threshold,
        alpha,
    })
}

/// Oracle type II error `Φ((C − ⟨B, M_1⟩)/Δ)`.
pub fn oracle_type2(rule: &OracleRule, params: &TgmmParams) -> Result<f64> {
    let mean_score = inner(&rule.discriminant, &params.mean1)?;
    Ok(std_normal_cdf((rule.threshold - mean_score) / rule.snr))
}

/// Oracle type I error `1 − Φ((C − ⟨B, M_0⟩)/Δ)`; equals `alpha` by construction.
pub fn oracle_type1(rule: &OracleRule, params: &TgmmParams) -> Result<f64> {
    let mean_score = inner(&rule.discriminant, &params.mean0)?;
    Ok(std_normal_cdf((mean_score - rule.threshold) / rule.snr))
}

/// Gaussian matrix with orthonormalized columns (two passes of modified Gram–Schmidt).
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut RandomSource) -> Matrix {
    assert!(cols <= rows);
    let mut q = Matrix::from_fn(rows, cols, |_, _| rng.standard_normal());
    for _pass in 0..2 {
        for j in 0..cols {
            for k in 0..j {
                let proj = q.column(k).dot(&q.column(j));
                let qk = q.column(k).into_owned();
                q.column_mut(j).axpy(-proj, &qk, 1.0);
            }
            let norm = q.column(j).norm();
            q.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    q
}

pub(crate) fn check_ranks(shape: &Shape, ranks: &[usize]) -> Result<()> {
    if ranks.len() != shape.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks for an order-{} tensor",
            ranks.len(),
            shape.order()
        )));
    }
    for (m, &r) in ranks.iter().enumerate() {
        let max = shape.dim(m);
        if r == 0 || r > max {
            return Err(Error::InvalidRank {
                mode: m,
                rank: r,
                max,
            });
        }
    }
    Ok(())
}

/// Random Tucker tensor with Gaussian core, orthonormal Gaussian factors and
/// Frobenius norm `target_norm`.
pub fn random_tucker(
    shape: &Shape,
    ranks: &[usize],
    target_norm: f64,
    rng: &mut RandomSource,
) -> Result<TuckerFactors> {
    check_ranks(shape, ranks)?;
    if !(target_norm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target norm must be positive, got {target_norm}"
        )));
    }
    let core_shape = Shape::new(ranks.to_vec())?;
    let mut core = DenseTensor::zeros(core_shape);
    rng.fill_standard_normal(core.data_mut());
    let core = core.scale(target_norm / core.frobenius_norm());
    let factors = ranks
        .iter()
        .zip(shape.dims())
        .map(|(&r, &d)| random_orthonormal(d, r, rng))
        .collect();
    TuckerFactors::new(core, factors)
}

/// `B` for the simulation studies: a random Tucker tensor with `‖B‖_F = target_snr`.
pub fn random_tucker_signal(
    shape: &Shape,
    ranks: &[usize],
    target_snr: f64,
    rng: &mut RandomSource,
) -> Result<DenseTensor> {
    let t = random_tucker(shape, ranks, target_snr, rng)?;
    let mut b = tucker_reconstruct(&t)?;
    // remove the last bit of rounding drift in the norm
    let norm = b.frobenius_norm();
    b = b.scale(target_snr / norm);
    Ok(b)
}
