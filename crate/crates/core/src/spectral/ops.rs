//! Differential operators, Leray projection and grid-quadrature norms.
//!
//! Every operator is a spectral multiplier and returns a new field.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::{chunked_sum, SpectralScalarField, SpectralVectorField};
use crate::spectral::grid::Grid;

/// Spatial axis, `1`, `2` or `3` in the mathematical labelling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn from_number(axis: usize) -> Result<Axis> {
        match axis {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::InvalidParameter(format!("axis must be 1, 2 or 3, got {axis}"))),
        }
    }
}

fn i_times(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-c.im * k, c.re * k)
}

/// `∂_axis f`: multiplies each coefficient by `i k_axis`.
pub fn partial_derivative(f: &SpectralScalarField, axis: Axis) -> SpectralScalarField {
    let g = f.grid().clone();
    let n = g.n();
    let d = axis.index();
    f.map_coeffs(|idx, c| {
        let i = match d {
            0 => idx % n,
            1 => (idx / n) % n,
            _ => idx / (n * n),
        };
        i_times(c, g.derivative_wavenumber(i))
    })
}

pub fn gradient(f: &SpectralScalarField) -> SpectralVectorField {
    SpectralVectorField::from_components([
        partial_derivative(f, Axis::X1),
        partial_derivative(f, Axis::X2),
        partial_derivative(f, Axis::X3),
    ])
}

pub fn curl(v: &SpectralVectorField) -> SpectralVectorField {
    let g = v.grid().clone();
    let [a, b, c] = [v.component(0).coeffs(), v.component(1).coeffs(), v.component(2).coeffs()];
    let len = g.len();
    let mut out = [
        Vec::with_capacity(len),
        Vec::with_capacity(len),
        Vec::with_capacity(len),
    ];
    for idx in 0..len {
        let k = g.derivative_k(idx);
        out[0].push(i_times(c[idx], k[1]) - i_times(b[idx], k[2]));
        out[1].push(i_times(a[idx], k[2]) - i_times(c[idx], k[0]));
        out[2].push(i_times(b[idx], k[0]) - i_times(a[idx], k[1]));
    }
    let band = v.band();
    let [x, y, z] = out;
    SpectralVectorField::from_components([
        SpectralScalarField::from_parts(&g, x, band),
        SpectralScalarField::from_parts(&g, y, band),
        SpectralScalarField::from_parts(&g, z, band),
    ])
}

pub fn divergence(v: &SpectralVectorField) -> SpectralScalarField {
    let g = v.grid().clone();
    let [a, b, c] = [v.component(0).coeffs(), v.component(1).coeffs(), v.component(2).coeffs()];
    let out = (0..g.len())
        .map(|idx| {
            let k = g.derivative_k(idx);
            i_times(a[idx], k[0]) + i_times(b[idx], k[1]) + i_times(c[idx], k[2])
        })
        .collect();
    SpectralScalarField::from_parts(&g, out, v.band())
}

pub fn laplacian(f: &SpectralScalarField) -> SpectralScalarField {
    let g = f.grid().clone();
    let k_sq = g.k_squared();
    f.map_coeffs(|idx, c| -c * k_sq[idx])
}

pub fn vector_laplacian(v: &SpectralVectorField) -> SpectralVectorField {
    v.map(laplacian)
}

/// `∇(∇·v)`.
pub fn grad_div(v: &SpectralVectorField) -> SpectralVectorField {
    gradient(&divergence(v))
}

/// Projection onto divergence-free fields, `P = I - k kᵀ/|k|²`; the mean mode
/// passes through unchanged.
pub fn leray_project(v: &SpectralVectorField) -> SpectralVectorField {
    let g = v.grid().clone();
    let mut comps = [
        v.component(0).coeffs().to_vec(),
        v.component(1).coeffs().to_vec(),
        v.component(2).coeffs().to_vec(),
    ];
    project_in_place(&g, &mut comps);
    let band = v.band();
    let [x, y, z] = comps;
    SpectralVectorField::from_components([
        SpectralScalarField::from_parts(&g, x, band),
        SpectralScalarField::from_parts(&g, y, band),
        SpectralScalarField::from_parts(&g, z, band),
    ])
}

pub(crate) fn project_in_place(g: &Grid, comps: &mut [Vec<Complex64>; 3]) {
    for idx in 1..g.len() {
        let k = g.derivative_k(idx);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if kk == 0.0 {
            continue;
        }
        let dot = comps[0][idx] * k[0] + comps[1][idx] * k[1] + comps[2][idx] * k[2];
        let s = dot / kk;
        for d in 0..3 {
            comps[d][idx] -= s * k[d];
        }
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p exponent must be >= 1, got {p}")));
    }
    Ok(())
}

/// Rectangle-rule `L^p` norm of nonnegative pointwise magnitudes on the box.
/// `p = ∞` is the grid maximum.
pub fn lp_norm_samples(grid: &Grid, magnitudes: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    let max = magnitudes.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let cell = grid.spacing().powi(3);
    let sum = chunked_sum(magnitudes, |&v| (v.abs() / max).powf(p));
    Ok(max * (cell * sum).powf(1.0 / p))
}

/// Fields that have an `L^p` norm on the periodic box.
pub trait LpNorm {
    /// Spectral `L²` norm from Parseval.
    fn l2_norm(&self) -> f64;
    /// Pointwise Euclidean magnitude on grid points.
    fn magnitudes(&self) -> Vec<f64>;
    fn grid(&self) -> &Grid;
}

impl LpNorm for SpectralScalarField {
    fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn magnitudes(&self) -> Vec<f64> {
        let mut x = self.to_physical();
        for v in x.iter_mut() {
            *v = v.abs();
        }
        x
    }

    fn grid(&self) -> &Grid {
        SpectralScalarField::grid(self)
    }
}

impl LpNorm for SpectralVectorField {
    fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn magnitudes(&self) -> Vec<f64> {
        let [a, b, c] = self.to_physical();
        a.iter()
            .zip(&b)
            .zip(&c)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .collect()
    }

    fn grid(&self) -> &Grid {
        SpectralVectorField::grid(self)
    }
}

/// `‖f‖_{L^p}` over the box. `p = 2` uses Parseval, which coincides with the
/// rectangle rule for grid fields; other `p` use grid quadrature.
pub fn lp_norm<F: LpNorm + ?Sized>(f: &F, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(f.l2_norm());
    }
    lp_norm_samples(f.grid(), &f.magnitudes(), p)
}

/// Same as [`lp_norm`] but always by quadrature, including `p = 2`.
pub fn lp_norm_quadrature<F: LpNorm + ?Sized>(f: &F, p: f64) -> Result<f64> {
    lp_norm_samples(f.grid(), &f.magnitudes(), p)
}
