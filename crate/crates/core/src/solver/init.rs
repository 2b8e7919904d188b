use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::spectral::{Grid, SpectralScalarField, SpectralVectorField};

use super::SimState;

/// `u₀ = (sin x₁ cos x₂ cos x₃, -cos x₁ sin x₂ cos x₃, 0)`, `ω₀ = 0`.
///
/// Built from its eight Fourier modes `k ∈ {±1}³` so that `k·û = 0` holds
/// exactly.
pub fn taylor_green_init(grid: &Arc<Grid>) -> SimState {
    let mut u1 = vec![Complex64::default(); grid.len()];
    let mut u2 = vec![Complex64::default(); grid.len()];
    for a in [-1i64, 1] {
        for b in [-1i64, 1] {
            for c in [-1i64, 1] {
                let idx = grid.flat_index(
                    grid.index_of(a).unwrap(),
                    grid.index_of(b).unwrap(),
                    grid.index_of(c).unwrap(),
                );
                u1[idx] = Complex64::new(0.0, -0.125 * a as f64);
                u2[idx] = Complex64::new(0.0, 0.125 * b as f64);
            }
        }
    }
    let band = 1;
    let u = SpectralVectorField::from_components([
        SpectralScalarField::from_parts(grid, u1, band),
        SpectralScalarField::from_parts(grid, u2, band),
        SpectralScalarField::zeros(grid),
    ]);
    SimState {
        u,
        omega: SpectralVectorField::zeros(grid),
        t: 0.0,
    }
}

/// `u₀ = 0`, `ω₀ = ω̄` everywhere.
pub fn constant_omega_init(grid: &Arc<Grid>, omega_bar: [f64; 3]) -> SimState {
    let omega = omega_bar.map(|w| {
        let mut c = vec![Complex64::default(); grid.len()];
        c[0] = Complex64::new(w, 0.0);
        SpectralScalarField::from_parts(grid, c, 0)
    });
    SimState {
        u: SpectralVectorField::zeros(grid),
        omega: SpectralVectorField::from_components(omega),
        t: 0.0,
    }
}

/// Random band-limited data with shell energy spectrum `∝ |k|^slope` up to the
/// dealiasing cutoff. `u₀` is solenoidal; `ω₀` uses the same spectrum from an
/// independent stream. Both have unit mean square.
pub fn random_init(grid: &Arc<Grid>, seed: u64, spectrum_slope: f64) -> SimState {
    let u = random_vector(grid, seed, 0, spectrum_slope, true);
    let omega = random_vector(grid, seed, 1, spectrum_slope, false);
    SimState { u, omega, t: 0.0 }
}

fn random_vector(grid: &Arc<Grid>, seed: u64, stream: u64, slope: f64, solenoidal: bool) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let len = grid.len();
    let mut comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); len]);
    for idx in 1..len {
        if !grid.is_retained(idx) {
            continue;
        }
        let mirror = grid.mirror_index(idx);
        if mirror < idx {
            continue;
        }
        let kv = grid.k_vector(idx);
        let k = [kv[0] as f64, kv[1] as f64, kv[2] as f64];
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        // shell energy ~ k^slope spread over ~k² lattice points
        let amp = kk.powf(0.25 * (slope - 2.0));
        let mut c: [Complex64; 3] = std::array::from_fn(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * amp
        });
        if mirror == idx {
            for v in c.iter_mut() {
                v.im = 0.0;
            }
        }
        if solenoidal {
            let s = (c[0] * k[0] + c[1] * k[1] + c[2] * k[2]) / kk;
            for d in 0..3 {
                c[d] -= s * k[d];
            }
        }
        for d in 0..3 {
            comps[d][idx] = c[d];
            comps[d][mirror] = c[d].conj();
        }
    }
    let [a, b, c] = comps;
    let band = grid.dealias_cutoff();
    let v = SpectralVectorField::from_components([
        SpectralScalarField::from_parts(grid, a, band),
        SpectralScalarField::from_parts(grid, b, band),
        SpectralScalarField::from_parts(grid, c, band),
    ]);
    let ms = v.norm_sq() / grid.volume();
    if ms > 0.0 {
        v.scaled(1.0 / ms.sqrt())
    } else {
        v
    }
}
