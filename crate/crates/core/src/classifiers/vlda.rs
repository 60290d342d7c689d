use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimation::{class_means, common_shape, LabeledSample};
use crate::numerics::{cholesky, cholesky_solve, SpdMatrix};
use crate::tensor::{DenseTensor, Matrix};

use super::{tlda_threshold, LinearScorer, Method, NpClassifier, Scorer};

/// Vectorized LDA with a ridge `λ = ridge_scale · trace(S)/d` on the pooled
/// covariance `S`.
///
/// When `d > n` the solve goes through the `n × n` dual system
/// `(S + λI)⁻¹v = (v − Z(nλI + ZᵀZ)⁻¹Zᵀv)/λ`, `Z` holding the centered samples
/// as columns, so the `d × d` covariance is never formed.
pub fn fit_vlda(train: &[LabeledSample], ridge_scale: f64) -> Result<NpClassifier> {
    if !(ridge_scale >= 0.0 && ridge_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge scale must be finite and non-negative, got {ridge_scale}"
        )));
    }
    let shape = common_shape(train)?;
    let means = class_means(train)?;
    let d = shape.total();
    let n = train.len();

    let mut z = Matrix::zeros(d, n);
    for (j, s) in train.iter().enumerate() {
        let m = means.mean(s.label).data();
        for ((dst, &x), &mu) in z.column_mut(j).iter_mut().zip(s.tensor.data()).zip(m) {
            *dst = x - mu;
        }
    }
    let trace = z.norm_squared() / n as f64;
    let lambda = ridge_scale * trace / d as f64;
    let v = DVector::from_column_slice(means.difference().data());

    let w = if d <= n {
        let mut s = Matrix::zeros(d, d);
        s.gemm(1.0 / n as f64, &z, &z.transpose(), 0.0);
        let s = SpdMatrix::new(s)?.with_ridge(lambda);
        let l = cholesky(&s)?;
        let mut rhs = Matrix::from_column_slice(d, 1, v.as_slice());
        cholesky_solve(&l, &mut rhs);
        rhs.column(0).into_owned()
    } else {
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pooled covariance of {n} samples in dimension {d} is singular; a positive ridge is required"
            )));
        }
        let zt = z.transpose();
        let mut g = Matrix::zeros(n, n);
        g.gemm(1.0, &zt, &z, 0.0);
        for i in 0..n {
            g[(i, i)] += n as f64 * lambda;
        }
        let l = cholesky(&SpdMatrix::new(g)?)?;
        let mut u = Matrix::from_column_slice(n, 1, (&zt * &v).as_slice());
        cholesky_solve(&l, &mut u);
        let zu = &z * u.column(0);
        (v - zu) / lambda
    };

    let weights = DenseTensor::new(shape, w.as_slice().to_vec())?;
    let threshold = tlda_threshold(&means, &weights)?;
    Ok(NpClassifier {
        method: Method::VLda,
        scorer: Scorer::Linear(LinearScorer { weights }),
        threshold,
        levels: None,
    })
}
