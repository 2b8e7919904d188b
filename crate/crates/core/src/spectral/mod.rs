//! Periodic-box grid, transforms, differential operators and norms.
//!
//! The box is the torus `[0, 2π)³`. All integral quantities are computed on
//! the torus, not on ℝ³.

pub(crate) mod fft;
pub mod field;
pub mod grid;
pub mod ops;

pub use field::{to_physical, to_physical_many, to_spectral, SpectralScalarField, SpectralVectorField};
pub use grid::{make_grid, Grid};
pub use ops::{
    curl, divergence, grad_div, gradient, laplacian, leray_project, lp_norm, lp_norm_quadrature,
    lp_norm_samples, partial_derivative, vector_laplacian, Axis, LpNorm,
};
pub use rustfft::num_complex::Complex64;
