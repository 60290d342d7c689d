//! Distribution-free Neyman–Pearson threshold selection.
//!
//! Given `n` held-out class-0 scores sorted as `t_(1) ≤ .. ≤ t_(n)`, the rule
//! `1{s(X) > t_(k)}` has population type I error above `α` with probability at
//! most `v(k) = P(Binomial(n, 1 − α) ≥ k)`. The calibrated threshold is
//! `t_(k*)` with `k*` the smallest `k` such that `v(k) ≤ δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tgmm::check_probability;

/// Type I target `alpha` and violation tolerance `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpLevels {
    pub alpha: f64,
    pub delta: f64,
}

impl NpLevels {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        let levels = NpLevels { alpha, delta };
        levels.validate()?;
        Ok(levels)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("alpha", self.alpha)?;
        check_probability("delta", self.delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationResult {
    /// 1-based order statistic index.
    pub k_star: usize,
    pub threshold: f64,
    pub n_calib: usize,
    pub tail_at_k: f64,
}

/// `Σ_{j=k}^{n} C(n, j) (1−α)^j α^{n−j}`, i.e. `P(Binomial(n, 1−α) ≥ k)`.
pub fn binomial_tail(n: usize, k: usize, alpha: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "order statistic index {k} out of range 1..={n}"
        )));
    }
    // log terms from j = n downwards:
    // t_{j-1} = t_j · j/(n−j+1) · α/(1−α)
    let log_odds = alpha.ln() - (-alpha).ln_1p();
    let mut logs = Vec::with_capacity(n - k + 1);
    let mut lt = n as f64 * (-alpha).ln_1p();
    logs.push(lt);
    for j in (k + 1..=n).rev() {
        lt += (j as f64).ln() - ((n - j + 1) as f64).ln() + log_odds;
        logs.push(lt);
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // smallest terms first
    let mut sorted = logs;
    sorted.sort_by(f64::total_cmp);
    let sum: f64 = sorted.iter().map(|l| (l - max).exp()).sum();
    Ok((max + sum.ln()).exp().min(1.0))
}

/// Smallest calibration size for which `(1 − α)^n ≤ δ`, i.e. some order
/// statistic satisfies the violation bound.
pub fn min_calibration_size(levels: NpLevels) -> usize {
    let log_keep = (-levels.alpha).ln_1p();
    let mut n = (levels.delta.ln() / log_keep).ceil().max(1.0) as usize;
    while n > 1 && ((n - 1) as f64 * log_keep) <= levels.delta.ln() {
        n -= 1;
    }
    while (n as f64 * log_keep) > levels.delta.ln() {
        n += 1;
    }
    n
}

/// Order-statistic threshold over held-out class-0 scores.
pub fn umbrella_threshold(scores: &[f64], levels: NpLevels) -> Result<CalibrationResult> {
    levels.validate()?;
    let n = scores.len();
    let required = min_calibration_size(levels);
    if n < required {
        return Err(Error::CalibrationSetTooSmall { got: n, required });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument(
            "calibration scores contain NaN".into(),
        ));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);

    // v(k) decreases in k and v(n) ≤ δ holds since n ≥ required
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if binomial_tail(n, mid, levels.alpha)? <= levels.delta {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(CalibrationResult {
        k_star: lo,
        threshold: sorted[lo - 1],
        n_calib: n,
        tail_at_k: binomial_tail(n, lo, levels.alpha)?,
    })
}

/// Fraction of entries strictly above `alpha`.
pub fn violation_rate(type1_errors: &[f64], alpha: f64) -> Result<f64> {
    if type1_errors.is_empty() {
        return Err(Error::InvalidArgument(
            "violation rate of an empty sequence".into(),
        ));
    }
    let over = type1_errors.iter().filter(|&&e| e > alpha).count();
    Ok(over as f64 / type1_errors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levels(alpha: f64, delta: f64) -> NpLevels {
        NpLevels::new(alpha, delta).unwrap()
    }

    #[test]
    fn tail_endpoints() {
        for &(n, a) in &[(10usize, 0.05), (45, 0.05), (7, 0.5), (60, 0.01)] {
            let last = binomial_tail(n, n, a).unwrap();
            assert!(((last - (1.0 - a).powi(n as i32)) / last).abs() < 1e-13);
            let first = binomial_tail(n, 1, a).unwrap();
            assert!((first - (1.0 - a.powi(n as i32))).abs() < 1e-13);
        }
        let v = binomial_tail(45, 45, 0.05).unwrap();
        assert!((v - 0.099_440_388).abs() < 1e-6, "{v}");
    }

    #[test]
    fn tail_rejects_bad_index() {
        assert!(binomial_tail(10, 0, 0.1).is_err());
        assert!(binomial_tail(10, 11, 0.1).is_err());
        assert!(binomial_tail(10, 5, 1.0).is_err());
    }

    #[test]
    fn tail_survives_large_n() {
        let v = binomial_tail(1_000_000, 950_000, 0.05).unwrap();
        assert!(v.is_finite() && v > 0.4 && v < 0.6, "{v}");
        let v = binomial_tail(1_000_000, 1, 0.05).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn min_sizes() {
        assert_eq!(min_calibration_size(levels(0.05, 0.1)), 45);
        assert_eq!(min_calibration_size(levels(0.5, 0.5)), 1);
        assert_eq!(min_calibration_size(levels(0.1, 0.1)), 22);
    }

    #[test]
    fn threshold_at_minimum_size_is_the_maximum() {
        let scores: Vec<f64> = (0..45).map(|i| ((i * 17) % 45) as f64).collect();
        let r = umbrella_threshold(&scores, levels(0.05, 0.1)).unwrap();
        assert_eq!(r.k_star, 45);
        assert_eq!(r.threshold, 44.0);
        assert!(r.tail_at_k <= 0.1);
        let prev = binomial_tail(45, 44, 0.05).unwrap();
        assert!((prev - 0.335).abs() < 1e-3, "{prev}");
    }

    #[test]
    fn too_small_calibration_set() {
        let scores = vec![0.0; 44];
        assert_eq!(
            umbrella_threshold(&scores, levels(0.05, 0.1)),
            Err(Error::CalibrationSetTooSmall {
                got: 44,
                required: 45
            })
        );
    }

    #[test]
    fn tied_scores_give_that_value() {
        let scores = vec![1.25; 100];
        let r = umbrella_threshold(&scores, levels(0.05, 0.1)).unwrap();
        assert_eq!(r.threshold, 1.25);
        assert!(scores.iter().all(|&s| !(s > r.threshold)));
    }

    #[test]
    fn k_star_is_minimal() {
        let scores: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let l = levels(0.05, 0.1);
        let r = umbrella_threshold(&scores, l).unwrap();
        assert!(binomial_tail(200, r.k_star, 0.05).unwrap() <= 0.1);
        assert!(binomial_tail(200, r.k_star - 1, 0.05).unwrap() > 0.1);
    }

    #[test]
    fn nan_scores_rejected() {
        let mut scores = vec![0.0; 50];
        scores[3] = f64::NAN;
        assert!(umbrella_threshold(&scores, levels(0.05, 0.1)).is_err());
    }

    #[test]
    fn violation_rate_counts_strict_exceedance() {
        assert_eq!(violation_rate(&[0.0; 5], 0.05).unwrap(), 0.0);
        assert_eq!(violation_rate(&[1.0; 5], 0.05).unwrap(), 1.0);
        let v = violation_rate(&[0.04, 0.06, 0.05], 0.05).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert!(violation_rate(&[], 0.05).is_err());
    }

    #[test]
    fn levels_validate() {
        assert!(NpLevels::new(0.0, 0.1).is_err());
        assert!(NpLevels::new(0.05, 1.0).is_err());
    }
}
