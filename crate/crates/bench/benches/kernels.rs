use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tnp_bench::{gaussian_matrix, gaussian_tensor, training_set};
use tnp_core::calibration::umbrella_threshold;
use tnp_core::estimation::{
    class_means, dtip, initial_discriminant, mode_covariances, DtipSettings,
};
use tnp_core::tensor::mode_product;
use tnp_core::{NpLevels, RandomSource};

fn bench_mode_product(c: &mut Criterion) {
    let mut rng = RandomSource::new(1);
    let mut group = c.benchmark_group("mode_product");
    for d in [15usize, 30] {
        let x = gaussian_tensor(&[d, d, d], &mut rng);
        let a = gaussian_matrix(d / 2, d, &mut rng);
        for mode in 0..3 {
            group.bench_with_input(BenchmarkId::new(format!("d{d}"), mode), &mode, |b, &m| {
                b.iter(|| mode_product(black_box(&x), black_box(&a), m).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_dtip(c: &mut Criterion) {
    let train = training_set(&[15, 15, 15], &[4, 6, 3], 600, 2);
    let means = class_means(&train).unwrap();
    let covs = mode_covariances(&train, &means).unwrap();
    let b0 = initial_discriminant(&means, &covs).unwrap();
    c.bench_function("dtip_15x15x15", |b| {
        b.iter(|| dtip(black_box(&b0), &[4, 6, 3], DtipSettings::default()).unwrap())
    });
}

fn bench_umbrella(c: &mut Criterion) {
    let levels = NpLevels::new(0.05, 0.1).unwrap();
    let mut group = c.benchmark_group("umbrella_threshold");
    for n in [100usize, 1000, 10_000] {
        let mut rng = RandomSource::new(n as u64);
        let scores: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &scores, |b, s| {
            b.iter(|| umbrella_threshold(black_box(s), levels).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mode_product, bench_dtip, bench_umbrella);
criterion_main!(benches);
