use proptest::prelude::*;

use tnp_core::calibration::{binomial_tail, umbrella_threshold};
use tnp_core::classifiers::LinearScorer;
use tnp_core::io::{
    decode_dataset, decode_model, encode_dataset, encode_model, format_real, TensorDataset,
};
use tnp_core::tensor::{fold, inner, mode_product, unfold};
use tnp_core::{DenseTensor, LabeledSample, Matrix, Method, NpClassifier, NpLevels, Scorer, Shape};

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    prop::collection::vec(1usize..5, 1..4).prop_flat_map(|dims| {
        let total: usize = dims.iter().product();
        prop::collection::vec(-10.0f64..10.0, total).prop_map(move |data| {
            DenseTensor::new(Shape::new(dims.clone()).unwrap(), data).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn unfold_then_fold_is_identity(x in tensor_strategy(), pick in 0usize..4) {
        let m = pick % x.order();
        let back = fold(&unfold(&x, m).unwrap(), m, x.shape()).unwrap();
        prop_assert_eq!(back.data(), x.data());
    }

    #[test]
    fn identity_mode_product_is_exact(x in tensor_strategy(), pick in 0usize..4) {
        let m = pick % x.order();
        let d = x.shape().dim(m);
        let y = mode_product(&x, &Matrix::identity(d, d), m).unwrap();
        prop_assert_eq!(y.data(), x.data());
    }

    #[test]
    fn inner_product_is_squared_norm(x in tensor_strategy()) {
        let ip = inner(&x, &x).unwrap();
        let n = x.frobenius_norm();
        prop_assert!((ip - n * n).abs() <= 1e-10 * (1.0 + ip));
    }

    #[test]
    fn binomial_tail_decreases_in_k(n in 1usize..200, alpha in 0.001f64..0.999) {
        let mut prev = 1.0 + 1e-12;
        for k in 1..=n {
            let v = binomial_tail(n, k, alpha).unwrap();
            prop_assert!(v <= prev, "v({k}) = {v} > {prev}");
            prop_assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    // The chosen order statistic does not depend on the score values, so a
    // strictly increasing transform moves the threshold covariantly.
    #[test]
    fn calibration_commutes_with_monotone_maps(
        scores in prop::collection::vec(-5.0f64..5.0, 45..200),
    ) {
        let levels = NpLevels::new(0.05, 0.1).unwrap();
        let a = umbrella_threshold(&scores, levels).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        let b = umbrella_threshold(&mapped, levels).unwrap();
        prop_assert_eq!(a.k_star, b.k_star);
        prop_assert_eq!(b.threshold, a.threshold.exp());
        for (s, t) in scores.iter().zip(&mapped) {
            prop_assert_eq!(*s > a.threshold, *t > b.threshold);
        }
    }

    #[test]
    fn dataset_bytes_round_trip(
        xs in prop::collection::vec(tensor_strategy(), 0..6),
        labels in prop::collection::vec(0u8..2, 6),
    ) {
        let shape = xs.first().map(|x| x.shape().clone()).unwrap_or_else(|| Shape::new(vec![2, 2]).unwrap());
        let samples: Vec<LabeledSample> = xs
            .into_iter()
            .filter(|x| x.shape() == &shape)
            .zip(labels)
            .map(|(x, y)| LabeledSample::new(x, y))
            .collect();
        let n = samples.len();
        let ds = TensorDataset::new(shape.clone(), samples).unwrap();
        let bytes = encode_dataset(&ds).unwrap();
        prop_assert_eq!(bytes.len(), 4 + 4 + 4 + 4 * shape.order() + 8 + n + 8 * n * shape.total());
        let back = decode_dataset(&bytes).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert!(decode_dataset(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn linear_model_bytes_round_trip(w in tensor_strategy(), threshold in -1e6f64..1e6) {
        let clf = NpClassifier {
            method: Method::TLdaNp,
            scorer: Scorer::Linear(LinearScorer { weights: w }),
            threshold,
            levels: Some(NpLevels::new(0.05, 0.1).unwrap()),
        };
        let back = decode_model(&encode_model(&clf).unwrap()).unwrap();
        prop_assert_eq!(back, clf);
    }

    #[test]
    fn six_significant_digits(v in -1e12f64..1e12) {
        let s = format_real(v);
        let parsed: f64 = s.parse().unwrap();
        prop_assert!((parsed - v).abs() <= 5e-6 * v.abs(), "{v} rendered as {s}");
        let digits = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        prop_assert!(digits.trim_start_matches('0').len() <= 6, "{s}");
    }
}
