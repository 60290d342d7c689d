//! Small dense symmetric linear algebra: Cholesky, SPD inverse, cyclic Jacobi
//! eigen-decomposition and Gram-based truncated SVD.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// A symmetric matrix intended to be positive definite.
///
/// Symmetry is enforced at construction; definiteness is only checked when
/// the matrix is factorized.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(Matrix);

impl SpdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let asym = asymmetry(&m)?;
        if asym > 1e-12 * m.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(SpdMatrix(symmetrize(&m)))
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix(Matrix::identity(n, n))
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        SpdMatrix(Matrix::identity(n, n) * value)
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub(crate) fn from_symmetric_unchecked(m: Matrix) -> Self {
        SpdMatrix(m)
    }

    /// `S + λ I`.
    pub fn with_ridge(&self, ridge: f64) -> SpdMatrix {
        let n = self.order();
        SpdMatrix(&self.0 + Matrix::identity(n, n) * ridge)
    }
}

fn asymmetry(m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in j + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    Ok(worst)
}

fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Lower-triangular `L` with `L Lᵀ = S`.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot drops to
/// `1e-12 · trace(S)/n` or below.
pub fn cholesky(s: &SpdMatrix) -> Result<Matrix> {
    let n = s.order();
    let a = s.as_matrix();
    let floor = 1e-12 * s.trace() / n as f64;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > floor) || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite { row: j, pivot });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        // column j below the diagonal: (a_ij - Σ_k l_ik l_jk) / l_jj
        let mut col: Vec<f64> = (j + 1..n).map(|i| a[(i, j)]).collect();
        for k in 0..j {
            let ljk = l[(j, k)];
            if ljk == 0.0 {
                continue;
            }
            let lk = l.column(k);
            for (c, i) in col.iter_mut().zip(j + 1..n) {
                *c -= lk[i] * ljk;
            }
        }
        for (c, i) in col.into_iter().zip(j + 1..n) {
            l[(i, j)] = c / diag;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ X = B` in place given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &mut Matrix) {
    let n = l.nrows();
    for mut col in b.column_iter_mut() {
        for i in 0..n {
            let mut v = col[i];
            for k in 0..i {
                v -= l[(i, k)] * col[k];
            }
            col[i] = v / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut v = col[i];
            for k in i + 1..n {
                v -= l[(k, i)] * col[k];
            }
            col[i] = v / l[(i, i)];
        }
    }
}

pub fn invert_spd(s: &SpdMatrix) -> Result<SpdMatrix> {
    let l = cholesky(s)?;
    let n = s.order();
    let mut inv = Matrix::identity(n, n);
    cholesky_solve(&l, &mut inv);
    Ok(SpdMatrix(symmetrize(&inv)))
}

/// Eigenvalues in descending order with orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Each eigenvector's largest-magnitude entry is made positive.
pub fn sym_eigen(s: &Matrix) -> Result<SymEigen> {
    let asym = asymmetry(s)?;
    let norm = s.norm();
    if asym > 1e-10 * norm.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = s.nrows();
    let mut a = symmetrize(s);
    let mut v = Matrix::identity(n, n);
    let target = 1e-15 * norm;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for j in 0..n {
            for i in j + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate_columns(&mut a, p, q, c, sn);
                rotate_rows(&mut a, p, q, c, sn);
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                rotate_columns(&mut v, p, q, c, sn);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).into_owned();
        fix_sign(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    Ok(SymEigen { values, vectors })
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.nrows() {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = c * mp - s * mq;
        m[(k, q)] = s * mp + c * mq;
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.ncols() {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = c * mp - s * mq;
        m[(q, k)] = s * mp + c * mq;
    }
}

fn fix_sign(col: &mut [f64]) {
    let mut best = 0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Leading `rank` left singular vectors of `a`, from the eigenvectors of `A Aᵀ`.
pub fn top_left_singular_vectors(a: &Matrix, rank: usize) -> Result<Matrix> {
    let max = a.nrows().min(a.ncols());
    if rank == 0 || rank > max {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} out of range 1..={max} for a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut gram = Matrix::zeros(a.nrows(), a.nrows());
    gram.gemm(1.0, a, &a.transpose(), 0.0);
    let eig = sym_eigen(&symmetrize(&gram))?;
    Ok(eig.vectors.columns(0, rank).into_owned())
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm(s: &Matrix) -> Result<f64> {
    let eig = sym_eigen(s)?;
    Ok(eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// `U Uᵀ`.
pub fn projector(u: &Matrix) -> Matrix {
    u * u.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(rows: usize, data: &[f64]) -> SpdMatrix {
        SpdMatrix::new(Matrix::from_row_slice(rows, rows, data)).unwrap()
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut state = seed;
        Matrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            SpdMatrix::new(m.clone()),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(
            cholesky(&SpdMatrix::identity(3)).unwrap(),
            Matrix::identity(3, 3)
        );
        let l = cholesky(&spd(2, &[4.0, 2.0, 2.0, 3.0])).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2f64.sqrt()]);
        assert!((&l - &expected).amax() < 1e-15);
        assert!(matches!(
            cholesky(&spd(2, &[1.0, 2.0, 2.0, 1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(cholesky(&SpdMatrix::scaled_identity(2, 0.0)).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            invert_spd(&SpdMatrix::identity(4)).unwrap().into_matrix(),
            Matrix::identity(4, 4)
        );
        let inv = invert_spd(&spd(2, &[2.0, 0.0, 0.0, 4.0])).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        assert!((inv.as_matrix() - expected).amax() < 1e-15);

        let g = pseudo_random(5, 5, 3);
        let a = SpdMatrix::new(&g * g.transpose() + Matrix::identity(5, 5) * 0.1).unwrap();
        let inv = invert_spd(&a).unwrap();
        let resid = (a.as_matrix() * inv.as_matrix() - Matrix::identity(5, 5)).norm();
        assert!(resid <= 1e-8 * 5.0, "residual {resid}");
    }

    #[test]
    fn eigen_examples() {
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = sym_eigen(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(
            e.vectors.column(0).iter().copied().collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(
            e.vectors.column(1).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0]
        );

        let e = sym_eigen(&Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((e.vectors[(0, 0)].abs() - h).abs() < 1e-14);
        assert!((e.vectors[(0, 0)] - e.vectors[(1, 0)]).abs() < 1e-14);
        assert!((e.vectors[(0, 1)] + e.vectors[(1, 1)]).abs() < 1e-14);

        let e = sym_eigen(&Matrix::identity(3, 3)).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn eigen_residual_on_random_symmetric() {
        for seed in 0..10 {
            let g = pseudo_random(12, 12, seed);
            let s = &g + g.transpose();
            let e = sym_eigen(&s).unwrap();
            let lam = Matrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
            let resid = (&s * &e.vectors - &e.vectors * lam).norm();
            assert!(resid <= 1e-9 * s.norm());
            let orth = (e.vectors.transpose() * &e.vectors - Matrix::identity(12, 12)).amax();
            assert!(orth < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singular_vector_examples() {
        let u = top_left_singular_vectors(&Matrix::identity(3, 3), 2).unwrap();
        let p = projector(&u);
        assert!((p.trace() - 2.0).abs() < 1e-14);

        let mut a = Matrix::zeros(2, 4);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 1.0;
        let u = top_left_singular_vectors(&a, 1).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 0.0]);

        assert!(top_left_singular_vectors(&a, 0).is_err());
        assert!(top_left_singular_vectors(&a, 3).is_err());
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3)).unwrap(), 0.0);
        let d = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-5.0, 2.0]));
        assert!((spectral_norm(&d).unwrap() - 5.0).abs() < 1e-15);
    }
}
