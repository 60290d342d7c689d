use crate::calibration::{min_calibration_size, umbrella_threshold, NpLevels};
use crate::error::{Error, Result};
use crate::estimation::{estimate_lda, ClassMeans, DtipSettings, LabeledSample};
use crate::tensor::{inner, DenseTensor};

use super::{LinearScorer, Method, NpClassifier, Scorer};

/// Bayes threshold `⟨(M̂_0 + M̂_1)/2, B̂⟩ − log(n_1/n_0)`.
pub fn tlda_threshold(means: &ClassMeans, b_hat: &DenseTensor) -> Result<f64> {
    let log_ratio = (means.n1 as f64 / means.n0 as f64).ln();
    Ok(inner(&means.midpoint(), b_hat)? - log_ratio)
}

/// T-LDA: low-rank discriminant fitted on all of `train`, Bayes threshold.
pub fn fit_tlda(
    train: &[LabeledSample],
    ranks: &[usize],
    settings: DtipSettings,
) -> Result<NpClassifier> {
    let est = estimate_lda(train, ranks, settings)?;
    let threshold = tlda_threshold(&est.means, &est.b_hat)?;
    Ok(NpClassifier {
        method: Method::TLda,
        scorer: Scorer::Linear(LinearScorer { weights: est.b_hat }),
        threshold,
        levels: None,
    })
}

/// T-LDA-NP: score fitted on `train` (the class-0 fitting half plus all of
/// class 1), threshold calibrated on the disjoint class-0 set `calib0`.
pub fn fit_tlda_np(
    train: &[LabeledSample],
    calib0: &[DenseTensor],
    ranks: &[usize],
    settings: DtipSettings,
    levels: NpLevels,
) -> Result<NpClassifier> {
    levels.validate()?;
    let required = min_calibration_size(levels);
    if calib0.len() < required {
        return Err(Error::CalibrationSetTooSmall {
            got: calib0.len(),
            required,
        });
    }
    let est = estimate_lda(train, ranks, settings)?;
    let scorer = LinearScorer { weights: est.b_hat };
    let scores = calib0
        .iter()
        .map(|x| scorer.score(x))
        .collect::<Result<Vec<_>>>()?;
    let cal = umbrella_threshold(&scores, levels)?;
    Ok(NpClassifier {
        method: Method::TLdaNp,
        scorer: Scorer::Linear(scorer),
        threshold: cal.threshold,
        levels: Some(levels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomSource;
    use crate::tensor::Shape;
    use crate::tgmm::{random_tucker_signal, TgmmParams, TgmmSampler};

    fn setting(seed: u64) -> (TgmmParams, RandomSource) {
        let mut rng = RandomSource::new(seed);
        let shape = Shape::new(vec![6, 5, 4]).unwrap();
        let b = random_tucker_signal(&shape, &[2, 2, 2], 3.0, &mut rng).unwrap();
        let p = TgmmParams::with_identity_covariance(DenseTensor::zeros(shape), b, 0.5).unwrap();
        (p, rng)
    }

    fn draw(p: &TgmmParams, n0: usize, n1: usize, rng: &mut RandomSource) -> Vec<LabeledSample> {
        let s = TgmmSampler::new(p).unwrap();
        (0..n0 + n1)
            .map(|i| {
                let y = u8::from(i >= n0);
                LabeledSample::new(s.sample(y, rng), y)
            })
            .collect()
    }

    #[test]
    fn balanced_threshold_is_the_midpoint() {
        let (p, _) = setting(1);
        let means = ClassMeans {
            mean0: p.mean0.clone(),
            mean1: p.mean1.clone(),
            n0: 10,
            n1: 10,
        };
        let b = p.mean_difference();
        let c = tlda_threshold(&means, &b).unwrap();
        let mid = inner(&p.mean0.add(&p.mean1).unwrap().scale(0.5), &b).unwrap();
        assert!((c - mid).abs() < 1e-12);

        let skewed = ClassMeans {
            n1: 20,
            n0: 10,
            ..means
        };
        let c2 = tlda_threshold(&skewed, &b).unwrap();
        assert!((c - c2 - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn tlda_separates_classes() {
        let (p, mut rng) = setting(2);
        let train = draw(&p, 200, 200, &mut rng);
        let clf = fit_tlda(&train, &[2, 2, 2], DtipSettings::default()).unwrap();
        let test = draw(&p, 500, 500, &mut rng);
        let correct = test
            .iter()
            .filter(|s| clf.predict(&s.tensor).unwrap() == s.label)
            .count();
        assert!(correct as f64 / 1000.0 > 0.85);
    }

    #[test]
    fn np_variant_checks_calibration_size_first() {
        let (p, mut rng) = setting(3);
        let train = draw(&p, 50, 50, &mut rng);
        let calib: Vec<DenseTensor> = draw(&p, 10, 0, &mut rng)
            .into_iter()
            .map(|s| s.tensor)
            .collect();
        let levels = NpLevels::new(0.05, 0.1).unwrap();
        assert_eq!(
            fit_tlda_np(&train, &calib, &[2, 2, 2], DtipSettings::default(), levels).unwrap_err(),
            Error::CalibrationSetTooSmall {
                got: 10,
                required: 45
            }
        );
    }

    #[test]
    fn np_variant_threshold_is_an_order_statistic() {
        let (p, mut rng) = setting(4);
        let train = draw(&p, 100, 100, &mut rng);
        let calib: Vec<DenseTensor> = draw(&p, 100, 0, &mut rng)
            .into_iter()
            .map(|s| s.tensor)
            .collect();
        let levels = NpLevels::new(0.05, 0.1).unwrap();
        let clf = fit_tlda_np(&train, &calib, &[2, 2, 2], DtipSettings::default(), levels).unwrap();
        let scores: Vec<f64> = calib.iter().map(|x| clf.score(x).unwrap()).collect();
        assert!(scores.contains(&clf.threshold));
        let fired = scores.iter().filter(|&&s| s > clf.threshold).count();
        // k* for n = 100, α = 0.05, δ = 0.1 leaves at most a handful above
        assert!(fired <= 3, "{fired}");
    }
}
