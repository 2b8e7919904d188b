//! Three-dimensional complex FFT built from batched 1D rustfft passes.
//!
//! Transforms accept a `band` hint: the largest `|k_i|` that may carry a
//! nonzero coefficient. Lines that are identically zero in spectral space are
//! skipped on the way in (inverse) and never computed on the way out
//! (forward). With `band >= n/2` both directions are the plain full transform.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn active(&self, band: usize) -> Vec<usize> {
        let n = self.n;
        if band >= n / 2 {
            return (0..n).collect();
        }
        (0..n)
            .filter(|&i| {
                let k = if i <= n / 2 { i } else { n - i };
                k <= band
            })
            .collect()
    }

    /// Unnormalized inverse transform (`Σ_k c_k e^{+ik·x}`), in place.
    pub(crate) fn inverse(&self, data: &mut [Complex64], band: usize) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n * n);
        let act = self.active(band);
        let fft = &self.inverse;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); act.len() * n];

        // axis 3, only lines whose (k1, k2) are both in band
        for &i2 in &act {
            gather_axis3(data, &mut buf, &act, i2, n);
            fft.process_with_scratch(&mut buf, &mut scratch);
            scatter_axis3(data, &buf, &act, i2, n);
        }
        // axis 2, lines with k1 in band
        for plane in data.chunks_exact_mut(n * n) {
            gather_axis2(plane, &mut buf, &act, n);
            fft.process_with_scratch(&mut buf, &mut scratch);
            scatter_axis2(plane, &buf, &act, n);
        }
        // axis 1, all lines
        fft.process_with_scratch(data, &mut scratch);
    }

    /// Unnormalized forward transform (`Σ_x f(x) e^{-ik·x}`), in place.
    /// Every output with some `|k_i| > band` is set to zero.
    pub(crate) fn forward(&self, data: &mut [Complex64], band: usize) {
        self.forward_in_band(data, band);
        self.zero_outside(data, band);
    }

    /// Forward transform that leaves garbage outside the band.
    fn forward_in_band(&self, data: &mut [Complex64], band: usize) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n * n);
        let act = self.active(band);
        let fft = &self.forward;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); act.len() * n];

        fft.process_with_scratch(data, &mut scratch);
        for plane in data.chunks_exact_mut(n * n) {
            gather_axis2(plane, &mut buf, &act, n);
            fft.process_with_scratch(&mut buf, &mut scratch);
            scatter_axis2(plane, &buf, &act, n);
        }
        for &i2 in &act {
            gather_axis3(data, &mut buf, &act, i2, n);
            fft.process_with_scratch(&mut buf, &mut scratch);
            scatter_axis3(data, &buf, &act, i2, n);
        }
    }

    fn zero_outside(&self, data: &mut [Complex64], band: usize) {
        let n = self.n;
        let act = self.active(band);
        if act.len() < n {
            let mut inside = vec![false; n];
            for &i in &act {
                inside[i] = true;
            }
            for (i3, slab) in data.chunks_exact_mut(n * n).enumerate() {
                for (i2, line) in slab.chunks_exact_mut(n).enumerate() {
                    if !inside[i3] || !inside[i2] {
                        line.fill(Complex64::default());
                    } else {
                        for (i1, v) in line.iter_mut().enumerate() {
                            if !inside[i1] {
                                *v = Complex64::default();
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Transforms between the compressed lattice of modes with every
/// `|k_i| <= band` (ordered `a₁ + m(a₂ + m a₃)` over the active indices) and
/// the full physical grid. Holds its own intermediate buffers.
pub(crate) struct ModeTransform {
    n: usize,
    act: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    l3: Vec<Complex64>,
    l2: Vec<Complex64>,
}

impl ModeTransform {
    pub(crate) fn new(fft: &Fft3, band: usize) -> ModeTransform {
        let n = fft.n;
        let act = fft.active(band);
        let m = act.len();
        let scratch_len = fft.forward.get_inplace_scratch_len().max(fft.inverse.get_inplace_scratch_len());
        ModeTransform {
            n,
            act,
            forward: fft.forward.clone(),
            inverse: fft.inverse.clone(),
            scratch: vec![Complex64::default(); scratch_len],
            l3: vec![Complex64::default(); m * m * n],
            l2: vec![Complex64::default(); n * m * n],
        }
    }

    /// Active per-axis indices, in compressed order.
    #[cfg(test)]
    pub(crate) fn active(&self) -> &[usize] {
        &self.act
    }

    /// Unnormalized inverse transform of compressed `modes` into `out`.
    pub(crate) fn inverse(&mut self, modes: &[Complex64], out: &mut [Complex64]) {
        let (n, m) = (self.n, self.act.len());
        debug_assert_eq!(modes.len(), m * m * m);
        debug_assert_eq!(out.len(), n * n * n);
        let act = &self.act;
        // axis 3: lines (a2, a1) over i3
        self.l3.fill(Complex64::default());
        for a2 in 0..m {
            for a3b in (0..m).step_by(TILE) {
                let a3e = (a3b + TILE).min(m);
                for a1 in 0..m {
                    let line = (a2 * m + a1) * n;
                    for a3 in a3b..a3e {
                        self.l3[line + act[a3]] = modes[a1 + m * (a2 + m * a3)];
                    }
                }
            }
        }
        self.inverse.process_with_scratch(&mut self.l3, &mut self.scratch);
        // axis 2: lines (i3, a1) over i2
        self.l2.fill(Complex64::default());
        for a1 in 0..m {
            for i3b in (0..n).step_by(TILE) {
                for (a2, &i2) in act.iter().enumerate() {
                    let src = (a2 * m + a1) * n;
                    for i3 in i3b..i3b + TILE {
                        self.l2[(i3 * m + a1) * n + i2] = self.l3[src + i3];
                    }
                }
            }
        }
        self.inverse.process_with_scratch(&mut self.l2, &mut self.scratch);
        // axis 1: full lines (i3, i2) over i1
        for i3 in 0..n {
            let plane = &mut out[i3 * n * n..(i3 + 1) * n * n];
            plane.fill(Complex64::default());
            for i2b in (0..n).step_by(TILE) {
                for (a1, &i1) in act.iter().enumerate() {
                    let src = (i3 * m + a1) * n;
                    for i2 in i2b..i2b + TILE {
                        plane[i2 * n + i1] = self.l2[src + i2];
                    }
                }
            }
        }
        self.inverse.process_with_scratch(out, &mut self.scratch);
    }

    /// Unnormalized forward transform of `data` (destroyed) restricted to the
    /// compressed modes.
    pub(crate) fn forward(&mut self, data: &mut [Complex64], modes: &mut [Complex64]) {
        let (n, m) = (self.n, self.act.len());
        debug_assert_eq!(modes.len(), m * m * m);
        let act = &self.act;
        self.forward.process_with_scratch(data, &mut self.scratch);
        for i3 in 0..n {
            let plane = &data[i3 * n * n..(i3 + 1) * n * n];
            for i2b in (0..n).step_by(TILE) {
                for (a1, &i1) in act.iter().enumerate() {
                    let dst = (i3 * m + a1) * n;
                    for i2 in i2b..i2b + TILE {
                        self.l2[dst + i2] = plane[i2 * n + i1];
                    }
                }
            }
        }
        self.forward.process_with_scratch(&mut self.l2, &mut self.scratch);
        for a1 in 0..m {
            for i3b in (0..n).step_by(TILE) {
                for (a2, &i2) in act.iter().enumerate() {
                    let dst = (a2 * m + a1) * n;
                    for i3 in i3b..i3b + TILE {
                        self.l3[dst + i3] = self.l2[(i3 * m + a1) * n + i2];
                    }
                }
            }
        }
        self.forward.process_with_scratch(&mut self.l3, &mut self.scratch);
        for a2 in 0..m {
            for a3b in (0..m).step_by(TILE) {
                let a3e = (a3b + TILE).min(m);
                for a1 in 0..m {
                    let line = (a2 * m + a1) * n;
                    for a3 in a3b..a3e {
                        modes[a1 + m * (a2 + m * a3)] = self.l3[line + act[a3]];
                    }
                }
            }
        }
    }
}

/// Transpose tile edge; a 64-byte cache line holds four complex values.
const TILE: usize = 4;

fn gather_axis2(plane: &[Complex64], buf: &mut [Complex64], act: &[usize], n: usize) {
    for i2 in 0..n {
        let row = &plane[i2 * n..(i2 + 1) * n];
        for (a, &i1) in act.iter().enumerate() {
            buf[a * n + i2] = row[i1];
        }
    }
}

fn scatter_axis2(plane: &mut [Complex64], buf: &[Complex64], act: &[usize], n: usize) {
    for i2 in 0..n {
        let row = &mut plane[i2 * n..(i2 + 1) * n];
        for (a, &i1) in act.iter().enumerate() {
            row[i1] = buf[a * n + i2];
        }
    }
}

fn gather_axis3(data: &[Complex64], buf: &mut [Complex64], act: &[usize], i2: usize, n: usize) {
    for i3 in 0..n {
        let row = &data[(i3 * n + i2) * n..(i3 * n + i2 + 1) * n];
        for (a, &i1) in act.iter().enumerate() {
            buf[a * n + i3] = row[i1];
        }
    }
}

fn scatter_axis3(data: &mut [Complex64], buf: &[Complex64], act: &[usize], i2: usize, n: usize) {
    for i3 in 0..n {
        let row = &mut data[(i3 * n + i2) * n..(i3 * n + i2 + 1) * n];
        for (a, &i1) in act.iter().enumerate() {
            row[i1] = buf[a * n + i3];
        }
    }
}
