//! Dense tensors and the multilinear algebra used throughout the crate.
//!
//! Storage is mode-1-fastest: the element at 0-based index `(i_1, .., i_M)`
//! lives at `i_1 + d_1 * (i_2 + d_2 * (i_3 + ...))`. With this layout
//! `vec(X x_m A) = (I ⊗ .. ⊗ A ⊗ .. ⊗ I) vec(X)` and a Kronecker-structured
//! covariance reads `Σ_M ⊗ .. ⊗ Σ_1`. Mode indices are 0-based in the API.

use nalgebra::{DMatrix, DMatrixView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Mode sizes `d_1 .. d_M` of a tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape(
                "a tensor needs at least one mode".into(),
            ));
        }
        if let Some(m) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!("mode {m} has size 0")));
        }
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn dim(&self, mode: usize) -> usize {
        self.0[mode]
    }

    /// Number of elements, `Π d_m`.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// `d_{-m}`, the product of every mode size except `mode`.
    pub fn complement(&self, mode: usize) -> usize {
        self.total() / self.0[mode]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.order() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            })
        }
    }

    /// Product of the sizes of the modes before and after `mode`.
    fn split_at(&self, mode: usize) -> (usize, usize) {
        let left = self.0[..mode].iter().product();
        let right = self.0[mode + 1..].iter().product();
        (left, right)
    }

    fn with_dim(&self, mode: usize, size: usize) -> Shape {
        let mut dims = self.0.clone();
        dims[mode] = size;
        Shape(dims)
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// An order-M real array with explicit shape.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.total() {
            return Err(Error::InvalidShape(format!(
                "shape {shape} holds {} elements but {} were given",
                shape.total(),
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.total()];
        DenseTensor { shape, data }
    }

    /// Builds a tensor by evaluating `f` on every 0-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut index = vec![0usize; shape.order()];
        let mut data = Vec::with_capacity(shape.total());
        for _ in 0..shape.total() {
            data.push(f(&index));
            for (m, i) in index.iter_mut().enumerate() {
                *i += 1;
                if *i < shape.dim(m) {
                    break;
                }
                *i = 0;
            }
        }
        DenseTensor { shape, data }
    }

    /// A 2-way tensor holding the entries of `matrix`.
    pub fn from_matrix(matrix: &Matrix) -> Self {
        let shape = Shape(vec![matrix.nrows(), matrix.ncols()]);
        DenseTensor {
            shape,
            data: matrix.as_slice().to_vec(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// `vec(X)`; the storage order is the vectorization order.
    pub fn vectorize(&self) -> &[f64] {
        &self.data
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order());
        let mut linear = 0;
        for m in (0..self.order()).rev() {
            linear = linear * self.shape.dim(m) + index[m];
        }
        linear
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.linear_index(index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> DenseTensor {
        self.map(|x| x * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: f64, other: &DenseTensor) -> Result<()> {
        check_same_shape(&self.shape, &other.shape)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        check_same_shape(&self.shape, &other.shape)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

fn check_same_shape(expected: &Shape, found: &Shape) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: expected.dims().to_vec(),
            found: found.dims().to_vec(),
        })
    }
}

/// Mode-`mode` matricization (Kolda–Bader column order).
///
/// Element `(i_1..i_M)` goes to row `i_m`, column
/// `Σ_{l≠m} i_l Π_{p<l, p≠m} d_p`.
pub fn unfold(x: &DenseTensor, mode: usize) -> Result<Matrix> {
    x.shape.check_mode(mode)?;
    let dm = x.shape.dim(mode);
    let (left, right) = x.shape.split_at(mode);
    let data = &x.data;
    Ok(Matrix::from_fn(dm, left * right, |i, col| {
        let (l, r) = (col % left, col / left);
        data[l + left * (i + dm * r)]
    }))
}

/// Transpose of [`unfold`], built directly (`d_{-m} × d_m`).
pub fn unfold_transposed(x: &DenseTensor, mode: usize) -> Result<Matrix> {
    x.shape.check_mode(mode)?;
    let dm = x.shape.dim(mode);
    let (left, right) = x.shape.split_at(mode);
    let mut out = Matrix::zeros(left * right, dm);
    // column i of the output is the mode-m slice i, stored contiguously
    for i in 0..dm {
        let mut column = out.column_mut(i);
        for r in 0..right {
            let base = left * (i + dm * r);
            for l in 0..left {
                column[l + left * r] = x.data[base + l];
            }
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(a: &Matrix, mode: usize, shape: &Shape) -> Result<DenseTensor> {
    shape.check_mode(mode)?;
    let dm = shape.dim(mode);
    let (left, right) = shape.split_at(mode);
    if a.nrows() != dm || a.ncols() != left * right {
        return Err(Error::DimensionMismatch(format!(
            "cannot fold a {}x{} matrix along mode {mode} of shape {shape}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut data = vec![0.0; shape.total()];
    for r in 0..right {
        for i in 0..dm {
            for l in 0..left {
                data[l + left * (i + dm * r)] = a[(i, l + left * r)];
            }
        }
    }
    Ok(DenseTensor {
        shape: shape.clone(),
        data,
    })
}

/// `X ×_m A`: contracts mode `mode` of `x` with the columns of `a` (`k × d_m`).
pub fn mode_product(x: &DenseTensor, a: &Matrix, mode: usize) -> Result<DenseTensor> {
    x.shape.check_mode(mode)?;
    let dm = x.shape.dim(mode);
    if a.ncols() != dm {
        return Err(Error::DimensionMismatch(format!(
            "mode-{mode} product needs a matrix with {dm} columns, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let k = a.nrows();
    let (left, right) = x.shape.split_at(mode);
    let shape = x.shape.with_dim(mode, k);
    let mut out = vec![0.0; shape.total()];
    if left == 1 {
        // the mode-m unfolding is the raw column-major buffer
        let xv = DMatrixView::from_slice(&x.data, dm, right);
        let mut ov = nalgebra::DMatrixViewMut::from_slice(&mut out, k, right);
        ov.gemm(1.0, a, &xv, 0.0);
    } else {
        let at = a.transpose();
        for r in 0..right {
            let xs = &x.data[left * dm * r..left * dm * (r + 1)];
            let os = &mut out[left * k * r..left * k * (r + 1)];
            let xv = DMatrixView::from_slice(xs, left, dm);
            let mut ov = nalgebra::DMatrixViewMut::from_slice(os, left, k);
            ov.gemm(1.0, &xv, &at, 0.0);
        }
    }
    Ok(DenseTensor { shape, data: out })
}

/// Applies `maps[m]` on mode `m` wherever it is present.
pub fn multi_mode_product(x: &DenseTensor, maps: &[Option<&Matrix>]) -> Result<DenseTensor> {
    if maps.len() != x.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} mode maps given for an order-{} tensor",
            maps.len(),
            x.order()
        )));
    }
    let mut out = x.clone();
    for (mode, map) in maps.iter().enumerate() {
        if let Some(a) = map {
            out = mode_product(&out, a, mode)?;
        }
    }
    Ok(out)
}

/// Frobenius inner product `vec(X)ᵀ vec(Y)`.
pub fn inner(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    check_same_shape(&x.shape, &y.shape)?;
    Ok(dot(&x.data, &y.data))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Core tensor plus one orthonormal factor per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerFactors {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

impl TuckerFactors {
    /// Validates shapes, ranks and column orthonormality (1e-10 per entry).
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        let t = Self::new_unchecked(core, factors)?;
        for (m, u) in t.factors.iter().enumerate() {
            let gram = u.transpose() * u;
            let dev = (gram - Matrix::identity(u.ncols(), u.ncols())).amax();
            if dev > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "factor {m} is not orthonormal (deviation {dev:e})"
                )));
            }
        }
        Ok(t)
    }

    pub(crate) fn new_unchecked(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for an order-{} core",
                factors.len(),
                core.order()
            )));
        }
        for (m, u) in factors.iter().enumerate() {
            let r = core.shape.dim(m);
            if u.ncols() != r || u.nrows() < r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {m} is {}x{} but the core has rank {r} on that mode",
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        Ok(TuckerFactors { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.shape.dims().to_vec()
    }

    pub fn shape(&self) -> Shape {
        Shape(self.factors.iter().map(|u| u.nrows()).collect())
    }
}

/// `F ×_1 U_1 ×_2 .. ×_M U_M`.
pub fn tucker_reconstruct(t: &TuckerFactors) -> Result<DenseTensor> {
    let maps: Vec<Option<&Matrix>> = t.factors.iter().map(Some).collect();
    multi_mode_product(&t.core, &maps)
}
