//! Sample estimates of the tensor LDA model and the iterative Tucker
//! projection (DTIP) that turns the plug-in discriminant into a low-rank one.

use crate::error::{Error, Result};
use crate::numerics::{invert_spd, projector, spectral_norm, sym_eigen, SpdMatrix};
use crate::tensor::{
    mode_product, multi_mode_product, tucker_reconstruct, unfold, unfold_transposed, DenseTensor,
    Matrix, Shape, TuckerFactors,
};

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub tensor: DenseTensor,
    pub label: u8,
}

impl LabeledSample {
    pub fn new(tensor: DenseTensor, label: u8) -> Self {
        LabeledSample { tensor, label }
    }
}

/// Checks that every sample shares one shape and returns it.
pub fn common_shape(data: &[LabeledSample]) -> Result<Shape> {
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty dataset".into()))?;
    let shape = first.tensor.shape().clone();
    for s in data {
        if s.tensor.shape() != &shape {
            return Err(Error::ShapeMismatch {
                expected: shape.dims().to_vec(),
                found: s.tensor.shape().dims().to_vec(),
            });
        }
        if s.label > 1 {
            return Err(Error::InvalidArgument(format!(
                "label must be 0 or 1, got {}",
                s.label
            )));
        }
    }
    Ok(shape)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMeans {
    pub mean0: DenseTensor,
    pub mean1: DenseTensor,
    pub n0: usize,
    pub n1: usize,
}

impl ClassMeans {
    pub fn mean(&self, label: u8) -> &DenseTensor {
        if label == 0 {
            &self.mean0
        } else {
            &self.mean1
        }
    }

    pub fn difference(&self) -> DenseTensor {
        self.mean1.sub(&self.mean0).expect("means share a shape")
    }

    /// `(M̂_0 + M̂_1)/2`.
    pub fn midpoint(&self) -> DenseTensor {
        self.mean0
            .add(&self.mean1)
            .expect("means share a shape")
            .scale(0.5)
    }
}

pub fn class_means(data: &[LabeledSample]) -> Result<ClassMeans> {
    if data.is_empty() {
        return Err(Error::EmptyClass(0));
    }
    let shape = common_shape(data)?;
    let mut sums = [DenseTensor::zeros(shape.clone()), DenseTensor::zeros(shape)];
    let mut counts = [0usize; 2];
    for s in data {
        let y = s.label as usize;
        sums[y].axpy(1.0, &s.tensor)?;
        counts[y] += 1;
    }
    for (y, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(Error::EmptyClass(y as u8));
        }
    }
    let [s0, s1] = sums;
    Ok(ClassMeans {
        mean0: s0.scale(1.0 / counts[0] as f64),
        mean1: s1.scale(1.0 / counts[1] as f64),
        n0: counts[0],
        n1: counts[1],
    })
}

/// Pooled mode-wise covariances
/// `Σ̂_m = (n d_{-m})^{-1} Σ_y Σ_i mat_m(X_i − M̂_y) mat_m(X_i − M̂_y)ᵀ`.
pub fn mode_covariances(data: &[LabeledSample], means: &ClassMeans) -> Result<Vec<SpdMatrix>> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "mode covariances need at least 2 samples, got {n}"
        )));
    }
    let shape = means.mean0.shape().clone();
    let order = shape.order();
    let mut acc: Vec<Matrix> = shape.dims().iter().map(|&d| Matrix::zeros(d, d)).collect();
    for s in data {
        let centered = s.tensor.sub(means.mean(s.label))?;
        for (m, a) in acc.iter_mut().enumerate() {
            let ut = unfold_transposed(&centered, m)?;
            a.gemm_tr(1.0, &ut, &ut, 1.0);
        }
    }
    (0..order)
        .map(|m| {
            let scale = 1.0 / (n as f64 * shape.complement(m) as f64);
            let a = &acc[m] * scale;
            let sym = (&a + a.transpose()) * 0.5;
            Ok(SpdMatrix::from_symmetric_unchecked(sym))
        })
        .collect()
}

/// Inverts a covariance estimate, loading the diagonal with
/// `λ = c · trace/d` for `c ∈ {1e-8, 1e-6, 1e-4, 1e-2}` when it is singular.
pub fn invert_with_ridge(cov: &SpdMatrix, mode: usize) -> Result<Matrix> {
    match invert_spd(cov) {
        Ok(inv) => return Ok(inv.into_matrix()),
        Err(Error::NotPositiveDefinite { .. }) => {}
        Err(e) => return Err(e),
    }
    let base = cov.trace() / cov.order() as f64;
    if !(base > 0.0 && base.is_finite()) {
        return Err(Error::UnrecoverableSingularCovariance { mode, ridge: 0.0 });
    }
    let mut ridge = 0.0;
    for c in [1e-8, 1e-6, 1e-4, 1e-2] {
        ridge = c * base;
        match invert_spd(&cov.with_ridge(ridge)) {
            Ok(inv) => return Ok(inv.into_matrix()),
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnrecoverableSingularCovariance { mode, ridge })
}

/// Spectral initialization `B̂^init = (M̂_1 − M̂_0) ×_m Σ̂_m^{-1}`.
pub fn initial_discriminant(means: &ClassMeans, mode_covs: &[SpdMatrix]) -> Result<DenseTensor> {
    let inverses = mode_covs
        .iter()
        .enumerate()
        .map(|(m, c)| invert_with_ridge(c, m))
        .collect::<Result<Vec<_>>>()?;
    let maps: Vec<Option<&Matrix>> = inverses.iter().map(Some).collect();
    multi_mode_product(&means.difference(), &maps)
}

/// Stopping rule for [`dtip`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtipSettings {
    pub epsilon: f64,
    pub max_iter: usize,
}

impl Default for DtipSettings {
    fn default() -> Self {
        DtipSettings {
            epsilon: 1e-6,
            max_iter: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DtipOutput {
    pub tucker: TuckerFactors,
    pub b_hat: DenseTensor,
    pub iterations: usize,
    pub converged: bool,
    /// `‖F̂^(t)‖_F` after the spectral start (`t = 0`) and each sweep.
    pub core_norms: Vec<f64>,
}

// Leading eigenvectors of A Aᵀ; unlike the public SVD helper this allows
// `rank` to exceed the column count (the extra directions are null vectors).
fn leading_left_vectors(a: &Matrix, rank: usize) -> Result<Matrix> {
    let mut gram = Matrix::zeros(a.nrows(), a.nrows());
    gram.gemm(1.0, a, &a.transpose(), 0.0);
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = sym_eigen(&gram)?;
    Ok(eig.vectors.columns(0, rank).into_owned())
}

fn project_all_but(b: &DenseTensor, factors: &[Matrix], skip: usize) -> Result<DenseTensor> {
    let mut z = b.clone();
    for (j, u) in factors.iter().enumerate() {
        if j != skip {
            z = mode_product(&z, &u.transpose(), j)?;
        }
    }
    Ok(z)
}

fn core_of(b: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    let ts: Vec<Matrix> = factors.iter().map(|u| u.transpose()).collect();
    let maps: Vec<Option<&Matrix>> = ts.iter().map(Some).collect();
    multi_mode_product(b, &maps)
}

/// Discriminant Tensor Iterative Projection.
///
/// Starts from per-mode truncated SVDs of `b_init`, then sweeps the modes,
/// re-estimating `U_m` from `b_init` projected by the current factors on all
/// other modes (modes before `m` already updated in this sweep). Stops after
/// `max_iter` sweeps or once every projector moves by at most `epsilon` in
/// spectral norm.
pub fn dtip(b_init: &DenseTensor, ranks: &[usize], settings: DtipSettings) -> Result<DtipOutput> {
    let shape = b_init.shape();
    if ranks.len() != shape.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks for an order-{} tensor",
            ranks.len(),
            shape.order()
        )));
    }
    for (m, &r) in ranks.iter().enumerate() {
        let max = shape.dim(m).min(shape.complement(m));
        if r == 0 || r > max {
            return Err(Error::InvalidRank {
                mode: m,
                rank: r,
                max,
            });
        }
    }
    if !(settings.epsilon > 0.0) || settings.max_iter == 0 {
        return Err(Error::InvalidArgument(format!(
            "DTIP needs epsilon > 0 and at least one iteration, got {settings:?}"
        )));
    }

    let mut factors = ranks
        .iter()
        .enumerate()
        .map(|(m, &r)| leading_left_vectors(&unfold(b_init, m)?, r))
        .collect::<Result<Vec<_>>>()?;
    let mut core_norms = vec![core_of(b_init, &factors)?.frobenius_norm()];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iter {
        iterations += 1;
        let mut shift = 0.0f64;
        for m in 0..ranks.len() {
            let z = project_all_but(b_init, &factors, m)?;
            let updated = leading_left_vectors(&unfold(&z, m)?, ranks[m])?;
            let delta = projector(&updated) - projector(&factors[m]);
            shift = shift.max(spectral_norm(&((&delta + delta.transpose()) * 0.5))?);
            factors[m] = updated;
        }
        core_norms.push(core_of(b_init, &factors)?.frobenius_norm());
        if shift <= settings.epsilon {
            converged = true;
            break;
        }
    }

    let core = core_of(b_init, &factors)?;
    let tucker = TuckerFactors::new_unchecked(core, factors)?;
    let b_hat = tucker_reconstruct(&tucker)?;
    Ok(DtipOutput {
        tucker,
        b_hat,
        iterations,
        converged,
        core_norms,
    })
}

/// Everything the T-LDA pipeline estimates from one training set.
#[derive(Clone, Debug)]
pub struct LdaEstimates {
    pub means: ClassMeans,
    pub mode_covs: Vec<SpdMatrix>,
    pub b_init: DenseTensor,
    pub b_hat: DenseTensor,
    pub tucker: TuckerFactors,
    pub prior1_hat: f64,
    pub iterations_used: usize,
}

pub fn estimate_lda(
    data: &[LabeledSample],
    ranks: &[usize],
    settings: DtipSettings,
) -> Result<LdaEstimates> {
    let means = class_means(data)?;
    let mode_covs = mode_covariances(data, &means)?;
    let b_init = initial_discriminant(&means, &mode_covs)?;
    let out = dtip(&b_init, ranks, settings)?;
    let prior1_hat = means.n1 as f64 / (means.n0 + means.n1) as f64;
    Ok(LdaEstimates {
        means,
        mode_covs,
        b_init,
        b_hat: out.b_hat,
        tucker: out.tucker,
        prior1_hat,
        iterations_used: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomSource;
    use crate::tensor::fold;
    use crate::tgmm::random_tucker_signal;

    fn project_mode(x: &DenseTensor, u: &Matrix, mode: usize) -> Result<DenseTensor> {
        let p = projector(u);
        fold(&(p * unfold(x, mode)?), mode, x.shape())
    }

    fn shape(dims: &[usize]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    fn random_tensor(s: &Shape, rng: &mut RandomSource) -> DenseTensor {
        let mut t = DenseTensor::zeros(s.clone());
        rng.fill_standard_normal(t.data_mut());
        t
    }

    fn random_data(s: &Shape, n0: usize, n1: usize, rng: &mut RandomSource) -> Vec<LabeledSample> {
        (0..n0 + n1)
            .map(|i| LabeledSample::new(random_tensor(s, rng), u8::from(i >= n0)))
            .collect()
    }

    #[test]
    fn means_of_single_samples() {
        let mut rng = RandomSource::new(1);
        let s = shape(&[2, 3]);
        let data = random_data(&s, 1, 1, &mut rng);
        let m = class_means(&data).unwrap();
        assert_eq!(m.mean0, data[0].tensor);
        assert_eq!(m.mean1, data[1].tensor);
        assert_eq!((m.n0, m.n1), (1, 1));

        let dup = vec![data[0].clone(), data[0].clone(), data[1].clone()];
        assert_eq!(class_means(&dup).unwrap().mean0, data[0].tensor);
    }

    #[test]
    fn means_match_loop_oracle() {
        let mut rng = RandomSource::new(2);
        let s = shape(&[3, 2, 2]);
        let data = random_data(&s, 3, 2, &mut rng);
        let m = class_means(&data).unwrap();
        for k in 0..s.total() {
            let oracle =
                (data[0].tensor.data()[k] + data[1].tensor.data()[k] + data[2].tensor.data()[k])
                    / 3.0;
            assert!((m.mean0.data()[k] - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_class_is_reported() {
        let mut rng = RandomSource::new(3);
        let s = shape(&[2]);
        let data = random_data(&s, 3, 0, &mut rng);
        assert_eq!(class_means(&data).unwrap_err(), Error::EmptyClass(1));
        assert_eq!(class_means(&[]).unwrap_err(), Error::EmptyClass(0));
    }

    #[test]
    fn covariance_of_constant_classes_is_zero() {
        let mut rng = RandomSource::new(4);
        let s = shape(&[2, 3]);
        let a = random_tensor(&s, &mut rng);
        let b = random_tensor(&s, &mut rng);
        let data = vec![
            LabeledSample::new(a.clone(), 0),
            LabeledSample::new(a, 0),
            LabeledSample::new(b, 1),
        ];
        let m = class_means(&data).unwrap();
        for c in mode_covariances(&data, &m).unwrap() {
            assert!(c.as_matrix().amax() < 1e-15);
        }
        assert!(mode_covariances(&data[..1], &m).is_err());
    }

    #[test]
    fn vector_case_is_pooled_covariance() {
        let mut rng = RandomSource::new(5);
        let s = shape(&[3]);
        let data = random_data(&s, 4, 5, &mut rng);
        let m = class_means(&data).unwrap();
        let cov = mode_covariances(&data, &m).unwrap().remove(0);
        let mut oracle = Matrix::zeros(3, 3);
        for x in &data {
            let c = x.tensor.sub(m.mean(x.label)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    oracle[(i, j)] += c.data()[i] * c.data()[j] / 9.0;
                }
            }
        }
        assert!((cov.as_matrix() - oracle).amax() < 1e-12);
    }

    #[test]
    fn identity_covariance_estimates_concentrate() {
        let mut rng = RandomSource::new(6);
        let s = shape(&[8, 8, 8]);
        let data = random_data(&s, 2500, 2500, &mut rng);
        let m = class_means(&data).unwrap();
        for c in mode_covariances(&data, &m).unwrap() {
            let dev = (c.as_matrix() - Matrix::identity(8, 8)).amax();
            assert!(dev < 0.05, "deviation {dev}");
        }
    }

    #[test]
    fn initial_discriminant_scaling() {
        let mut rng = RandomSource::new(7);
        let s = shape(&[3, 2]);
        let data = random_data(&s, 3, 3, &mut rng);
        let m = class_means(&data).unwrap();
        let eye = vec![SpdMatrix::identity(3), SpdMatrix::identity(2)];
        let b = initial_discriminant(&m, &eye).unwrap();
        assert!(b.sub(&m.difference()).unwrap().frobenius_norm() < 1e-15);
        let scaled = vec![SpdMatrix::scaled_identity(3, 4.0), SpdMatrix::identity(2)];
        let b4 = initial_discriminant(&m, &scaled).unwrap();
        assert!(b4.sub(&b.scale(0.25)).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn singular_covariance_falls_back_to_ridge() {
        let mut rng = RandomSource::new(8);
        let s = shape(&[2, 2]);
        let data = random_data(&s, 2, 2, &mut rng);
        let m = class_means(&data).unwrap();
        let singular = SpdMatrix::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        let b = initial_discriminant(&m, &[singular, SpdMatrix::identity(2)]).unwrap();
        assert!(b.data().iter().all(|v| v.is_finite()));
        let zero = SpdMatrix::scaled_identity(2, 0.0);
        assert!(matches!(
            initial_discriminant(&m, &[zero, SpdMatrix::identity(2)]),
            Err(Error::UnrecoverableSingularCovariance { mode: 0, .. })
        ));
    }

    #[test]
    fn dtip_recovers_exact_low_rank_input() {
        let mut rng = RandomSource::new(9);
        let s = shape(&[6, 7, 5]);
        let b = random_tucker_signal(&s, &[2, 3, 2], 5.0, &mut rng).unwrap();
        let out = dtip(&b, &[2, 3, 2], DtipSettings::default()).unwrap();
        assert!(out.b_hat.sub(&b).unwrap().frobenius_norm() < 1e-10);
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
    }

    #[test]
    fn dtip_full_rank_is_identity() {
        let mut rng = RandomSource::new(10);
        let s = shape(&[3, 4, 2]);
        let x = random_tensor(&s, &mut rng);
        let out = dtip(&x, &[3, 4, 2], DtipSettings::default()).unwrap();
        assert!(out.b_hat.sub(&x).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn dtip_denoises() {
        let mut rng = RandomSource::new(11);
        let s = shape(&[10, 10, 10]);
        let b = random_tucker_signal(&s, &[2, 3, 2], 7.0, &mut rng).unwrap();
        let mut noisy = random_tensor(&s, &mut rng).scale(0.05);
        noisy.axpy(1.0, &b).unwrap();
        let out = dtip(&noisy, &[2, 3, 2], DtipSettings::default()).unwrap();
        let err = out.b_hat.sub(&b).unwrap().frobenius_norm();
        let raw = noisy.sub(&b).unwrap().frobenius_norm();
        assert!(err < raw, "{err} vs {raw}");
    }

    #[test]
    fn dtip_energy_is_non_decreasing() {
        for seed in 0..5 {
            let mut rng = RandomSource::new(100 + seed);
            let s = shape(&[8, 7, 6]);
            let b = random_tucker_signal(&s, &[3, 2, 2], 3.0, &mut rng).unwrap();
            let mut noisy = random_tensor(&s, &mut rng).scale(0.3);
            noisy.axpy(1.0, &b).unwrap();
            let out = dtip(
                &noisy,
                &[3, 2, 2],
                DtipSettings {
                    epsilon: 1e-12,
                    max_iter: 20,
                },
            )
            .unwrap();
            for w in out.core_norms.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{:?}", out.core_norms);
            }
        }
    }

    #[test]
    fn dtip_invariant_on_projected_output() {
        let mut rng = RandomSource::new(12);
        let s = shape(&[6, 5, 4]);
        let x = random_tensor(&s, &mut rng);
        let out = dtip(&x, &[2, 2, 2], DtipSettings::default()).unwrap();
        let again = dtip(&out.b_hat, &[2, 2, 2], DtipSettings::default()).unwrap();
        assert!(again.b_hat.sub(&out.b_hat).unwrap().frobenius_norm() < 1e-10);
        // B̂ equals b_init projected on every mode
        let mut proj = x.clone();
        for (m, u) in out.tucker.factors().iter().enumerate() {
            proj = project_mode(&proj, u, m).unwrap();
        }
        assert!(proj.sub(&out.b_hat).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn dtip_rejects_bad_arguments() {
        let x = DenseTensor::zeros(shape(&[3, 4]));
        assert!(matches!(
            dtip(&x, &[4, 1], DtipSettings::default()),
            Err(Error::InvalidRank { mode: 0, .. })
        ));
        assert!(dtip(&x, &[1], DtipSettings::default()).is_err());
        assert!(dtip(
            &x,
            &[1, 1],
            DtipSettings {
                epsilon: 0.0,
                max_iter: 5
            }
        )
        .is_err());
    }
}
