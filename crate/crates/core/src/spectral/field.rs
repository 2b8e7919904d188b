use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::grid::Grid;

/// Fourier coefficients of a real scalar field on a [`Grid`].
///
/// Normalization: `f(x) = Σ_k c_k e^{ik·x}`, so `c_0` is the grid mean.
/// `band` is a conservative bound on the largest `|k_i|` carrying a nonzero
/// coefficient; transforms use it to skip empty lines.
#[derive(Clone, Debug)]
pub struct SpectralScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    band: usize,
}

impl SpectralScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralScalarField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
            band: 0,
        }
    }

    /// Wrap raw coefficients. The band hint is recovered by scanning.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        let band = scan_band(grid, &coeffs);
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs,
            band,
        })
    }

    pub(crate) fn from_parts(grid: &Arc<Grid>, coeffs: Vec<Complex64>, band: usize) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralScalarField {
            grid: grid.clone(),
            coeffs,
            band: band.min(grid.n() / 2),
        }
    }

    /// Sample `f(x₁, x₂, x₃)` on the grid and transform.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut samples = Vec::with_capacity(grid.len());
        for i3 in 0..n {
            for i2 in 0..n {
                for i1 in 0..n {
                    samples.push(f(grid.coordinate(i1), grid.coordinate(i2), grid.coordinate(i3)));
                }
            }
        }
        to_spectral(grid, &samples).expect("sample count matches grid")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// Coefficient at signed wavenumber `k`, if representable.
    pub fn coeff_at(&self, k: [i64; 3]) -> Option<Complex64> {
        let g = &self.grid;
        let i1 = g.index_of(k[0])?;
        let i2 = g.index_of(k[1])?;
        let i3 = g.index_of(k[2])?;
        Some(self.coeffs[g.flat_index(i1, i2, i3)])
    }

    /// Grid mean of the physical field.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn to_physical(&self) -> Vec<f64> {
        to_physical(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_coeffs(|_, v| v * c)
    }

    pub(crate) fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        SpectralScalarField::from_parts(&self.grid, coeffs, self.band)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(SpectralScalarField::from_parts(
            &self.grid,
            coeffs,
            self.band.max(other.band),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// `max_k |c_k|`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `max_k |c_{-k} - conj(c_k)|`; zero for fields that are real in physical space.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len()).fold(0.0, |m, idx| {
            let d = self.coeffs[g.mirror_index(idx)] - self.coeffs[idx].conj();
            m.max(d.norm())
        })
    }

    /// `‖f‖²_{L²}` via Parseval: `(2π)³ Σ |c_k|²`.
    pub fn norm_sq(&self) -> f64 {
        self.grid.volume() * chunked_sum(&self.coeffs, |c| c.norm_sqr())
    }

    /// `∫ f g dx` via Parseval.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(self.grid.volume() * inner_coeffs(&self.coeffs, &other.coeffs))
    }

    /// Zero every mode with some `|k_i|` above the 2/3 cutoff.
    pub fn dealiased(&self) -> Self {
        let g = &self.grid;
        let c = g.dealias_cutoff();
        let mut out = self.coeffs.clone();
        for (idx, v) in out.iter_mut().enumerate() {
            if !g.is_retained(idx) {
                *v = Complex64::default();
            }
        }
        SpectralScalarField::from_parts(g, out, self.band.min(c))
    }
}

/// Three components sharing one grid.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    components: [SpectralScalarField; 3],
}

impl SpectralVectorField {
    pub fn new(components: [SpectralScalarField; 3]) -> Result<Self> {
        check_same_grid(components[0].grid(), components[1].grid())?;
        check_same_grid(components[0].grid(), components[2].grid())?;
        Ok(SpectralVectorField { components })
    }

    pub(crate) fn from_components(components: [SpectralScalarField; 3]) -> Self {
        SpectralVectorField { components }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let z = SpectralScalarField::zeros(grid);
        SpectralVectorField {
            components: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let comp = |d: usize| SpectralScalarField::from_fn(grid, |x, y, z| f(x, y, z)[d]);
        SpectralVectorField {
            components: [comp(0), comp(1), comp(2)],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralScalarField; 3] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &SpectralScalarField {
        &self.components[axis]
    }

    pub fn into_components(self) -> [SpectralScalarField; 3] {
        self.components
    }

    pub fn band(&self) -> usize {
        self.components.iter().map(|c| c.band()).max().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&SpectralScalarField) -> SpectralScalarField) -> Self {
        SpectralVectorField {
            components: [
                f(&self.components[0]),
                f(&self.components[1]),
                f(&self.components[2]),
            ],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|f| f.scaled(c))
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        Ok(SpectralVectorField {
            components: [
                self.components[0].combine(a, &other.components[0], b)?,
                self.components[1].combine(a, &other.components[1], b)?,
                self.components[2].combine(a, &other.components[2], b)?,
            ],
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sq()).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        let mut acc = 0.0;
        for (a, b) in self.components.iter().zip(&other.components) {
            acc += a.inner(b)?;
        }
        Ok(acc)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs_coeff()))
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.hermitian_defect()))
    }

    /// `max_k |k·c(k)| / max_k |c(k)|`, zero for the zero field.
    pub fn solenoidal_defect(&self) -> f64 {
        let g = self.grid();
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let [a, b, c] = [
            self.components[0].coeffs(),
            self.components[1].coeffs(),
            self.components[2].coeffs(),
        ];
        let mut worst: f64 = 0.0;
        for idx in 0..g.len() {
            let k = g.k_vector(idx);
            let d = a[idx] * k[0] as f64 + b[idx] * k[1] as f64 + c[idx] * k[2] as f64;
            worst = worst.max(d.norm());
        }
        worst / scale
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal_defect() <= 1e-10
    }

    pub fn dealiased(&self) -> Self {
        self.map(|f| f.dealiased())
    }

    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let mut out = to_physical_many(&[&self.components[0], &self.components[1], &self.components[2]]);
        let c = out.pop().unwrap();
        let b = out.pop().unwrap();
        let a = out.pop().unwrap();
        [a, b, c]
    }
}

pub(crate) fn check_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.n() == b.n() {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            left: a.n(),
            right: b.n(),
        })
    }
}

fn scan_band(grid: &Grid, coeffs: &[Complex64]) -> usize {
    let mut band = 0usize;
    for (idx, c) in coeffs.iter().enumerate() {
        if c.re != 0.0 || c.im != 0.0 {
            let k = grid.k_vector(idx);
            let m = k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap();
            band = band.max(m);
        }
    }
    band
}

const SUM_CHUNK: usize = 4096;

/// Fixed-chunk summation so results never depend on scheduling.
pub(crate) fn chunked_sum<T>(xs: &[T], f: impl Fn(&T) -> f64) -> f64 {
    xs.chunks(SUM_CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .sum()
}

pub(crate) fn inner_coeffs(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.chunks(SUM_CHUNK)
        .zip(b.chunks(SUM_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p.conj() * q).re).sum::<f64>())
        .sum()
}

/// Forward transform of real samples. The `k = 0` coefficient equals the sample mean.
pub fn to_spectral(grid: &Arc<Grid>, samples: &[f64]) -> Result<SpectralScalarField> {
    if samples.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            actual: samples.len(),
        });
    }
    Ok(to_spectral_many(grid, &[samples], grid.n() / 2).pop().unwrap())
}

/// Inverse transform to real grid samples.
pub fn to_physical(field: &SpectralScalarField) -> Vec<f64> {
    to_physical_many(&[field]).pop().unwrap()
}

/// Inverse-transform several fields, two per complex FFT.
pub fn to_physical_many(fields: &[&SpectralScalarField]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let grid = pair[0].grid();
        let fft = grid.fft();
        let mut buf = pair[0].coeffs.clone();
        let mut band = pair[0].band;
        if let Some(second) = pair.get(1) {
            for (b, c) in buf.iter_mut().zip(&second.coeffs) {
                *b += Complex64::new(-c.im, c.re);
            }
            band = band.max(second.band);
        }
        fft.inverse(&mut buf, band);
        out.push(buf.iter().map(|c| c.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|c| c.im).collect());
        }
    }
    out
}

/// Forward-transform several real arrays, two per complex FFT; modes with some
/// `|k_i| > band` are returned as zero.
pub(crate) fn to_spectral_many(
    grid: &Arc<Grid>,
    samples: &[&[f64]],
    band: usize,
) -> Vec<SpectralScalarField> {
    let n = grid.n();
    let inv_len = 1.0 / grid.len() as f64;
    let fft = grid.fft();
    let mut out = Vec::with_capacity(samples.len());
    for pair in samples.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        fft.forward(&mut buf, band);
        if pair.len() == 1 {
            for v in buf.iter_mut() {
                *v *= inv_len;
            }
            out.push(SpectralScalarField::from_parts(grid, buf, band));
            continue;
        }
        let mut first = vec![Complex64::default(); buf.len()];
        let mut second = vec![Complex64::default(); buf.len()];
        let half = 0.5 * inv_len;
        for i3 in 0..n {
            let m3 = (n - i3) % n;
            for i2 in 0..n {
                let m2 = (n - i2) % n;
                for i1 in 0..n {
                    let m1 = (n - i1) % n;
                    let idx = i1 + n * (i2 + n * i3);
                    let c = buf[idx];
                    let cm = buf[m1 + n * (m2 + n * m3)].conj();
                    first[idx] = (c + cm) * half;
                    let d = (c - cm) * half;
                    // (c - conj(c_{-k})) / (2i)
                    second[idx] = Complex64::new(d.im, -d.re);
                }
            }
        }
        out.push(SpectralScalarField::from_parts(grid, first, band));
        out.push(SpectralScalarField::from_parts(grid, second, band));
    }
    out
}
