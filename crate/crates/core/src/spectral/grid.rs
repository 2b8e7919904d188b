use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::fft::Fft3;

/// Uniform periodic grid on the box `[0, 2π)³`.
///
/// Storage order everywhere is x₁-fastest: `idx = i1 + n * (i2 + n * i3)`.
/// Index `i` along an axis carries the signed wavenumber `i` for `i <= n/2`
/// and `i - n` otherwise, so each axis holds `{-n/2+1, ..., n/2}`.
pub struct Grid {
    n: usize,
    wavenumbers: Vec<i64>,
    dealias_cutoff: usize,
    k_sq: Vec<f64>,
    fft: Fft3,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("dealias_cutoff", &self.dealias_cutoff)
            .finish()
    }
}

/// Build a grid with `n` points per axis. `n` must be a power of two, at least 8.
pub fn make_grid(n: usize) -> Result<Arc<Grid>> {
    Grid::new(n)
}

impl Grid {
    pub fn new(n: usize) -> Result<Arc<Grid>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        let wavenumbers: Vec<i64> = (0..n).map(|i| signed_wavenumber(i, n)).collect();
        let mut k_sq = Vec::with_capacity(n * n * n);
        for i3 in 0..n {
            for i2 in 0..n {
                for i1 in 0..n {
                    let (a, b, c) = (wavenumbers[i1], wavenumbers[i2], wavenumbers[i3]);
                    k_sq.push((a * a + b * b + c * c) as f64);
                }
            }
        }
        Ok(Arc::new(Grid {
            n,
            wavenumbers,
            dealias_cutoff: n / 3,
            k_sq,
            fft: Fft3::new(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of lattice points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        2.0 * PI
    }

    pub fn spacing(&self) -> f64 {
        self.box_length() / self.n as f64
    }

    /// Box volume `(2π)³`.
    pub fn volume(&self) -> f64 {
        self.box_length().powi(3)
    }

    /// Largest retained `|k_i|` under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.dealias_cutoff
    }

    /// Signed wavenumbers along one axis, in storage order.
    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    pub fn wavenumber(&self, index: usize) -> i64 {
        self.wavenumbers[index]
    }

    /// Inverse of [`Grid::wavenumber`]; `k` must lie in `{-n/2+1, ..., n/2}`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k <= -half || k > half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    /// Wavenumber used for odd-order derivatives: the Nyquist entry is dropped
    /// so that derivatives of real fields stay real.
    pub fn derivative_wavenumber(&self, index: usize) -> f64 {
        if 2 * index == self.n {
            0.0
        } else {
            self.wavenumbers[index] as f64
        }
    }

    pub fn flat_index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.n * (i2 + self.n * i3)
    }

    pub fn axis_indices(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    pub fn k_vector(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.axis_indices(idx);
        [self.wavenumbers[a], self.wavenumbers[b], self.wavenumbers[c]]
    }

    /// Derivative wavenumber vector (Nyquist components zeroed).
    pub fn derivative_k(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.axis_indices(idx);
        [
            self.derivative_wavenumber(a),
            self.derivative_wavenumber(b),
            self.derivative_wavenumber(c),
        ]
    }

    /// `|k|²` for every lattice point, in storage order.
    pub fn k_squared(&self) -> &[f64] {
        &self.k_sq
    }

    /// Flat index of the mode `-k`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.axis_indices(idx);
        self.flat_index((n - a) % n, (n - b) % n, (n - c) % n)
    }

    /// True when no component exceeds the dealiasing cutoff.
    pub fn is_retained(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff as i64;
        self.k_vector(idx).iter().all(|k| k.abs() <= c)
    }

    /// Largest `|k|` on the lattice.
    pub fn max_wavenumber_magnitude(&self) -> f64 {
        (3.0_f64).sqrt() * (self.n / 2) as f64
    }

    /// Physical coordinate of grid index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }
}

fn signed_wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n8_layout() {
        let g = make_grid(8).unwrap();
        assert_eq!(g.dealias_cutoff(), 2);
        let mut ks = g.wavenumbers().to_vec();
        ks.sort();
        assert_eq!(ks, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn n64_cutoff() {
        assert_eq!(make_grid(64).unwrap().dealias_cutoff(), 21);
    }

    #[test]
    fn rejects_bad_sizes() {
        for n in [0, 4, 6, 12, 100] {
            assert!(matches!(make_grid(n), Err(Error::Config(_))), "n={n}");
        }
    }

    #[test]
    fn wavenumber_round_trip() {
        let g = make_grid(16).unwrap();
        for i in 0..16 {
            assert_eq!(g.index_of(g.wavenumber(i)), Some(i));
        }
        assert_eq!(g.index_of(-8), None);
        assert_eq!(g.index_of(9), None);
    }

    #[test]
    fn mirror_is_involution() {
        let g = make_grid(8).unwrap();
        for idx in 0..g.len() {
            let m = g.mirror_index(idx);
            assert_eq!(g.mirror_index(m), idx);
            let (k, km) = (g.k_vector(idx), g.k_vector(m));
            for d in 0..3 {
                // Nyquist maps to itself.
                assert!(k[d] == -km[d] || (k[d] == 4 && km[d] == 4));
            }
        }
    }
}
