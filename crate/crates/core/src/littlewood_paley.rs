//! Homogeneous Littlewood–Paley decomposition on the periodic lattice.
//!
//! The radial pair `(χ, φ)` is built from the `exp(-1/x)` mollifier:
//! `χ = 1` on `|ξ| ≤ 3/4`, `χ = 0` on `|ξ| ≥ 4/3`, and `φ(ξ) = χ(ξ/2) - χ(ξ)`,
//! so `φ` lives on `3/4 ≤ |ξ| ≤ 8/3` and `Σ_j φ(2^{-j}ξ)` telescopes to one.
//! Blocks act as spectral multipliers `Δ̇_j f = φ(2^{-j}|k|) f̂(k)`; the mean
//! mode belongs to no block.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{lp_norm_samples, to_physical_many, Complex64, Grid, SpectralScalarField, SpectralVectorField};

/// Identifier of the shipped profile. Bump when the bump function changes.
pub const PROFILE_VERSION: &str = "exp-mollifier-v1";

const CHI_INNER: f64 = 0.75;
const CHI_OUTER: f64 = 4.0 / 3.0;

/// Radial profile of the dyadic multipliers.
pub trait RadialProfile: Send + Sync {
    /// Low-frequency cutoff, `1` near the origin.
    fn chi(&self, rho: f64) -> f64;

    /// Annular multiplier.
    fn phi(&self, rho: f64) -> f64 {
        self.chi(0.5 * rho) - self.chi(rho)
    }
}

/// The default smooth bump.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothBump;

fn mollifier(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl RadialProfile for SmoothBump {
    fn chi(&self, rho: f64) -> f64 {
        if rho <= CHI_INNER {
            return 1.0;
        }
        if rho >= CHI_OUTER {
            return 0.0;
        }
        let t = (rho - CHI_INNER) / (CHI_OUTER - CHI_INNER);
        let a = mollifier(1.0 - t);
        let b = mollifier(t);
        a / (a + b)
    }

    fn phi(&self, rho: f64) -> f64 {
        if rho <= CHI_INNER || rho >= 2.0 * CHI_OUTER {
            return 0.0;
        }
        self.chi(0.5 * rho) - self.chi(rho)
    }
}

/// Sampled multipliers `φ_j(k) = φ(2^{-j}|k|)` for every dyadic index that
/// touches a nonzero lattice point.
pub struct DyadicPartition {
    grid: Arc<Grid>,
    j_min: i32,
    j_max: i32,
    profile: Arc<dyn RadialProfile>,
    supports: Vec<Vec<(u32, f64)>>,
}

impl std::fmt::Debug for DyadicPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DyadicPartition")
            .field("n", &self.grid.n())
            .field("j_min", &self.j_min)
            .field("j_max", &self.j_max)
            .finish()
    }
}

pub fn build_partition(grid: &Arc<Grid>) -> DyadicPartition {
    DyadicPartition::with_profile(grid, Arc::new(SmoothBump))
}

impl DyadicPartition {
    pub fn with_profile(grid: &Arc<Grid>, profile: Arc<dyn RadialProfile>) -> DyadicPartition {
        // Lowest block reaching |k| = 1, highest block starting below max |k|.
        let mut j_min = 0i32;
        while 2f64.powi(j_min - 1) * 2.0 * CHI_OUTER > 1.0 {
            j_min -= 1;
        }
        let kmax = grid.max_wavenumber_magnitude();
        let mut j_max = j_min;
        while 2f64.powi(j_max + 1) * CHI_INNER < kmax {
            j_max += 1;
        }

        let count = (j_max - j_min + 1) as usize;
        let mut supports: Vec<Vec<(u32, f64)>> = vec![Vec::new(); count];
        let k_sq = grid.k_squared();
        for (idx, &ksq) in k_sq.iter().enumerate().skip(1) {
            let rho = ksq.sqrt();
            for (slot, j) in (j_min..=j_max).enumerate() {
                let w = profile.phi(rho * 2f64.powi(-j));
                if w != 0.0 {
                    supports[slot].push((idx as u32, w));
                }
            }
        }
        DyadicPartition {
            grid: grid.clone(),
            j_min,
            j_max,
            profile,
            supports,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    pub fn profile(&self) -> &dyn RadialProfile {
        self.profile.as_ref()
    }

    /// Nonzero `(flat index, φ_j)` pairs of block `j`; empty outside the range.
    pub fn support(&self, j: i32) -> &[(u32, f64)] {
        if self.contains(j) {
            &self.supports[(j - self.j_min) as usize]
        } else {
            &[]
        }
    }

    /// `φ_j(k)` at a flat lattice index.
    pub fn multiplier(&self, j: i32, idx: usize) -> f64 {
        if idx == 0 {
            return 0.0;
        }
        let rho = self.grid.k_squared()[idx].sqrt();
        self.profile.phi(rho * 2f64.powi(-j))
    }

    /// `max_{k≠0} |Σ_j φ_j(k) - 1|` over the lattice.
    pub fn partition_of_unity_defect(&self) -> f64 {
        let mut sum = vec![0.0f64; self.grid.len()];
        for support in &self.supports {
            for &(idx, w) in support {
                sum[idx as usize] += w;
            }
        }
        sum.iter().skip(1).fold(0.0, |m, s| m.max((s - 1.0).abs()))
    }

    /// Whether `Δ̇_j f` has a nonzero coefficient. Cheaper than building the block.
    pub fn touches(&self, f: &SpectralScalarField, j: i32) -> bool {
        let c = f.coeffs();
        self.support(j).iter().any(|&(idx, _)| c[idx as usize] != Complex64::default())
    }

    /// Largest `|k_i|` that block `j` can touch.
    fn block_band(&self, j: i32) -> usize {
        (2.0 * CHI_OUTER * 2f64.powi(j)).floor() as usize
    }
}

/// Result of [`dyadic_block`]; `in_range` is false when `j` lies outside the
/// partition, in which case the block is empty.
#[derive(Clone, Debug)]
pub struct DyadicBlock {
    pub j: i32,
    pub field: SpectralScalarField,
    pub in_range: bool,
}

/// `Δ̇_j f`.
pub fn dyadic_block(f: &SpectralScalarField, j: i32, partition: &DyadicPartition) -> DyadicBlock {
    let grid = f.grid();
    let in_range = partition.contains(j);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let src = f.coeffs();
    for &(idx, w) in partition.support(j) {
        coeffs[idx as usize] = src[idx as usize] * w;
    }
    let band = if in_range { partition.block_band(j).min(f.band()) } else { 0 };
    DyadicBlock {
        j,
        field: SpectralScalarField::from_parts(grid, coeffs, band),
        in_range,
    }
}

/// `Ṡ_j f = χ(2^{-j}D) f`, mean mode included.
pub fn low_pass(f: &SpectralScalarField, j: i32, partition: &DyadicPartition) -> SpectralScalarField {
    let g = f.grid().clone();
    let k_sq = g.k_squared();
    let scale = 2f64.powi(-j);
    let profile = partition.profile();
    f.map_coeffs(|idx, c| c * profile.chi(k_sq[idx].sqrt() * scale))
}

/// Ordered list of nonempty blocks `(j, Δ̇_j f)`.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: Arc<Grid>,
    blocks: Vec<(i32, SpectralScalarField)>,
}

impl DyadicDecomposition {
    pub fn blocks(&self) -> &[(i32, SpectralScalarField)] {
        &self.blocks
    }

    pub fn block(&self, j: i32) -> Option<&SpectralScalarField> {
        self.blocks.iter().find(|(q, _)| *q == j).map(|(_, b)| b)
    }

    /// `Σ_j Δ̇_j f`, which equals `f - mean(f)` for a proper partition.
    pub fn reconstruct(&self) -> SpectralScalarField {
        let mut acc = vec![Complex64::default(); self.grid.len()];
        let mut band = 0;
        for (_, b) in &self.blocks {
            for (a, c) in acc.iter_mut().zip(b.coeffs()) {
                *a += c;
            }
            band = band.max(b.band());
        }
        SpectralScalarField::from_parts(&self.grid, acc, band)
    }
}

pub fn decompose(f: &SpectralScalarField, partition: &DyadicPartition) -> DyadicDecomposition {
    let blocks = partition
        .j_range()
        .filter(|&j| partition.touches(f, j))
        .map(|j| dyadic_block(f, j, partition))
        .map(|b| (b.j, b.field))
        .collect();
    DyadicDecomposition {
        grid: f.grid().clone(),
        blocks,
    }
}

/// Indices `(s, p, q)` of `Ḃ^s_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("Besov index s must be finite, got {s}")));
        }
        for (name, v) in [("p", p), ("q", q)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidParameter(format!("Besov {name} must lie in [1, ∞], got {v}")));
            }
        }
        Ok(BesovParams { s, p, q })
    }
}

/// Scalar or vector field viewed as its scalar components.
pub trait Components {
    fn scalar_components(&self) -> Vec<&SpectralScalarField>;
}

impl Components for SpectralScalarField {
    fn scalar_components(&self) -> Vec<&SpectralScalarField> {
        vec![self]
    }
}

impl Components for SpectralVectorField {
    fn scalar_components(&self) -> Vec<&SpectralScalarField> {
        self.components().iter().collect()
    }
}

/// `‖Δ̇_j f‖_{L^p}` for each nonempty block of a scalar field.
///
/// Blocks do not depend on the Besov index `s`, so one table serves any
/// number of `(s, q)` evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNorms {
    pub p: f64,
    pub norms: Vec<(i32, f64)>,
}

impl BlockNorms {
    pub fn compute(f: &SpectralScalarField, p: f64, partition: &DyadicPartition) -> Result<BlockNorms> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("L^p exponent must be >= 1, got {p}")));
        }
        let blocks: Vec<DyadicBlock> = partition
            .j_range()
            .filter(|&j| partition.touches(f, j))
            .map(|j| dyadic_block(f, j, partition))
            .collect();
        let mut norms = Vec::with_capacity(blocks.len());
        if p == 2.0 {
            for b in &blocks {
                norms.push((b.j, b.field.norm_sq().sqrt()));
            }
        } else {
            let grid = f.grid();
            for pair in blocks.chunks(2) {
                let fields: Vec<&SpectralScalarField> = pair.iter().map(|b| &b.field).collect();
                let phys = to_physical_many(&fields);
                for (b, mut x) in pair.iter().zip(phys) {
                    for v in x.iter_mut() {
                        *v = v.abs();
                    }
                    norms.push((b.j, lp_norm_samples(grid, &x, p)?));
                }
            }
        }
        Ok(BlockNorms { p, norms })
    }

    /// Weighted `ℓ^q` combination `‖(2^{js} ‖Δ̇_j f‖_p)_j‖_{ℓ^q}`.
    pub fn besov(&self, s: f64, q: f64) -> f64 {
        let weighted = self.norms.iter().map(|&(j, v)| 2f64.powf(j as f64 * s) * v);
        if q.is_infinite() {
            weighted.fold(0.0, f64::max)
        } else {
            weighted.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }
}

/// Block tables for every scalar component of a field.
pub fn block_norms<F: Components + ?Sized>(f: &F, p: f64, partition: &DyadicPartition) -> Result<Vec<BlockNorms>> {
    f.scalar_components()
        .into_iter()
        .map(|c| BlockNorms::compute(c, p, partition))
        .collect()
}

/// `ℓ²` combination of per-component Besov norms.
pub fn combine_components(tables: &[BlockNorms], s: f64, q: f64) -> f64 {
    tables.iter().map(|t| t.besov(s, q).powi(2)).sum::<f64>().sqrt()
}

/// Homogeneous Besov norm `‖f‖_{Ḃ^s_{p,q}}`; vectors combine component norms in `ℓ²`.
pub fn besov_norm<F: Components + ?Sized>(f: &F, params: BesovParams, partition: &DyadicPartition) -> Result<f64> {
    let tables = block_norms(f, params.p, partition)?;
    Ok(combine_components(&tables, params.s, params.q))
}

/// Homogeneous Sobolev norm `(Σ_{k≠0} |k|^{2s} |f̂(k)|² (2π)³)^{1/2}`.
pub fn sobolev_norm<F: Components + ?Sized>(f: &F, s: f64) -> f64 {
    let mut total = 0.0;
    for c in f.scalar_components() {
        let g = c.grid();
        let k_sq = g.k_squared();
        let sum: f64 = c
            .coeffs()
            .iter()
            .zip(k_sq)
            .skip(1)
            .map(|(v, &ksq)| if ksq == 0.0 { 0.0 } else { ksq.powf(s) * v.norm_sqr() })
            .sum();
        total += g.volume() * sum;
    }
    total.sqrt()
}
