//! Shared fixtures for the benchmarks.

use tnp_core::tgmm::{random_tucker_signal, TgmmParams, TgmmSampler};
use tnp_core::{DenseTensor, LabeledSample, Matrix, RandomSource, Shape};

pub fn gaussian_tensor(dims: &[usize], rng: &mut RandomSource) -> DenseTensor {
    let mut t = DenseTensor::zeros(Shape::new(dims.to_vec()).unwrap());
    rng.fill_standard_normal(t.data_mut());
    t
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RandomSource) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.standard_normal())
}

/// Balanced training sample from the default simulation model.
pub fn training_set(dims: &[usize], ranks: &[usize], n: usize, seed: u64) -> Vec<LabeledSample> {
    let mut rng = RandomSource::new(seed);
    let shape = Shape::new(dims.to_vec()).unwrap();
    let b = random_tucker_signal(&shape, ranks, 7.0, &mut rng).unwrap();
    let params = TgmmParams::with_identity_covariance(DenseTensor::zeros(shape), b, 0.5).unwrap();
    let sampler = TgmmSampler::new(&params).unwrap();
    (0..n)
        .map(|i| {
            let y = (i % 2) as u8;
            LabeledSample::new(sampler.sample(y, &mut rng), y)
        })
        .collect()
}
