//! Dense linear algebra, Gaussian special functions and the seeded random source.

mod linalg;
mod normal;
mod rng;

pub use linalg::{
    cholesky, cholesky_solve, invert_spd, projector, spectral_norm, sym_eigen,
    top_left_singular_vectors, SpdMatrix, SymEigen,
};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use rng::RandomSource;
