//! Retained-mode storage and the fused right-hand-side / Lawson RK4 kernels.
//!
//! The integrator keeps only modes with every `|k_i| <= n/3`; everything else
//! is identically zero for dealiased fields. Six arrays hold
//! `(û₁, û₂, û₃, ω̂₁, ω̂₂, ω̂₃)` over that compressed lattice.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft::ModeTransform;
use crate::spectral::{Grid, SpectralScalarField, SpectralVectorField};

use super::{Coupling, SimState};

pub(crate) type Modes = [Vec<Complex64>; 6];

pub(crate) struct ModeTable {
    grid: Arc<Grid>,
    flat: Vec<u32>,
    mirror: Vec<u32>,
    k: Vec<[f64; 3]>,
    ksq: Vec<u32>,
}

impl ModeTable {
    pub(crate) fn new(grid: &Arc<Grid>) -> ModeTable {
        let n = grid.n();
        let c = grid.dealias_cutoff() as i64;
        let active: Vec<usize> = (0..n).filter(|&i| grid.wavenumber(i).abs() <= c).collect();
        let m = active.len();
        let mut pos_of = vec![usize::MAX; n];
        for (a, &i) in active.iter().enumerate() {
            pos_of[i] = a;
        }
        let total = m * m * m;
        let mut flat = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        let mut k = Vec::with_capacity(total);
        let mut ksq = Vec::with_capacity(total);
        for &i3 in &active {
            for &i2 in &active {
                for &i1 in &active {
                    flat.push(grid.flat_index(i1, i2, i3) as u32);
                    let (m1, m2, m3) = (pos_of[(n - i1) % n], pos_of[(n - i2) % n], pos_of[(n - i3) % n]);
                    mirror.push((m1 + m * (m2 + m * m3)) as u32);
                    let kv = [
                        grid.wavenumber(i1),
                        grid.wavenumber(i2),
                        grid.wavenumber(i3),
                    ];
                    ksq.push((kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]) as u32);
                    k.push([kv[0] as f64, kv[1] as f64, kv[2] as f64]);
                }
            }
        }
        ModeTable {
            grid: grid.clone(),
            flat,
            mirror,
            k,
            ksq,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.flat.len()
    }

    pub(crate) fn zeros(&self) -> Modes {
        std::array::from_fn(|_| vec![Complex64::default(); self.len()])
    }

    fn gather(&self, f: &SpectralScalarField) -> Vec<Complex64> {
        let c = f.coeffs();
        self.flat.iter().map(|&i| c[i as usize]).collect()
    }

    fn scatter(&self, v: &[Complex64]) -> SpectralScalarField {
        let mut c = vec![Complex64::default(); self.grid.len()];
        for (&i, &x) in self.flat.iter().zip(v) {
            c[i as usize] = x;
        }
        SpectralScalarField::from_parts(&self.grid, c, self.grid.dealias_cutoff())
    }

    /// Compress a state; modes above the cutoff are discarded.
    pub(crate) fn compress(&self, state: &SimState) -> Modes {
        let u = state.u.components();
        let w = state.omega.components();
        [
            self.gather(&u[0]),
            self.gather(&u[1]),
            self.gather(&u[2]),
            self.gather(&w[0]),
            self.gather(&w[1]),
            self.gather(&w[2]),
        ]
    }

    pub(crate) fn expand_vector(&self, a: &[Vec<Complex64>]) -> SpectralVectorField {
        SpectralVectorField::from_components([self.scatter(&a[0]), self.scatter(&a[1]), self.scatter(&a[2])])
    }

    pub(crate) fn expand(&self, x: &Modes, t: f64) -> SimState {
        SimState {
            u: self.expand_vector(&x[0..3]),
            omega: self.expand_vector(&x[3..6]),
            t,
        }
    }

    /// Remove the gradient part of the velocity in place.
    pub(crate) fn project_velocity(&self, x: &mut Modes) {
        let (u, _) = x.split_at_mut(3);
        for m in 0..self.len() {
            let k = self.k[m];
            let kk = self.ksq[m] as f64;
            if kk == 0.0 {
                continue;
            }
            let dot = u[0][m] * k[0] + u[1][m] * k[1] + u[2][m] * k[2];
            let s = dot / kk;
            u[0][m] -= s * k[0];
            u[1][m] -= s * k[1];
            u[2][m] -= s * k[2];
        }
    }
}

fn i_times(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-c.im * k, c.re * k)
}

/// Quantities that need one pass over the modes per step.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct StepDiagnostics {
    /// Net dissipation rate `D = -d/dt[½(‖u‖²+‖ω‖²)]`.
    pub net_dissipation: f64,
    /// `dD/dt`.
    pub net_dissipation_rate: f64,
    pub grad_u_sq: f64,
}

/// Quadratic products formed on the grid: the six distinct `u_i u_j`
/// followed by the nine `u_j ω_i` (index `6 + 3i + j`).
const PRODUCTS: usize = 15;
const UU: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

/// Per-mode factors `e^{λh/2}`, `e^{λh}` for one step size.
struct Factors {
    h: f64,
    half_u: Vec<f64>,
    full_u: Vec<f64>,
    half_w: Vec<f64>,
    full_w: Vec<f64>,
}

impl Factors {
    fn new(h: f64, ksq: &[u32]) -> Factors {
        let max = ksq.iter().copied().max().unwrap_or(0) as usize;
        let table = |shift: f64, scale: f64| -> Vec<f64> {
            let by_q: Vec<f64> = (0..=max).map(|q| (-(q as f64 + shift) * scale * h).exp()).collect();
            ksq.iter().map(|&q| by_q[q as usize]).collect()
        };
        Factors {
            h,
            half_u: table(0.0, 0.5),
            full_u: table(0.0, 1.0),
            half_w: table(2.0, 0.5),
            full_w: table(2.0, 1.0),
        }
    }

    fn half(&self, c: usize) -> &[f64] {
        if c < 3 {
            &self.half_u
        } else {
            &self.half_w
        }
    }

    fn full(&self, c: usize) -> &[f64] {
        if c < 3 {
            &self.full_u
        } else {
            &self.full_w
        }
    }
}

/// Right-hand side evaluator and integrating-factor RK4 stepper for one grid.
///
/// The advection terms are evaluated as `∂_j(u_j u_i)` and `∂_j(u_j ω_i)`.
/// For dealiased fields the truncated products are exact on the retained
/// modes, so with `k·û = 0` this equals `(u·∇)u`, `(u·∇)ω` to rounding while
/// needing 11 transforms per evaluation instead of 14.
pub(crate) struct Kernel {
    table: ModeTable,
    coupling: Coupling,
    transform: ModeTransform,
    pack: Vec<Complex64>,
    fields: Vec<Vec<Complex64>>,
    products: Vec<Vec<Complex64>>,
    spectral_products: Vec<Vec<Complex64>>,
    factors: Option<Factors>,
    /// Largest `|u|` seen in the most recent right-hand-side evaluation.
    pub(crate) last_max_velocity: f64,
}

impl Kernel {
    pub(crate) fn new(grid: &Arc<Grid>, coupling: Coupling) -> Kernel {
        let table = ModeTable::new(grid);
        let len = grid.len();
        let mm = table.len();
        let pairs = PRODUCTS.div_ceil(2);
        Kernel {
            table,
            coupling,
            transform: ModeTransform::new(grid.fft(), grid.dealias_cutoff()),
            pack: vec![Complex64::default(); mm],
            fields: vec![vec![Complex64::default(); len]; 3],
            products: vec![vec![Complex64::default(); len]; pairs],
            spectral_products: vec![vec![Complex64::default(); mm]; pairs],
            factors: None,
            last_max_velocity: 0.0,
        }
    }

    pub(crate) fn table(&self) -> &ModeTable {
        &self.table
    }

    /// Explicit part `N(x)`: everything except `-|k|²` on `u` and
    /// `-(|k|²+2)` on `ω`.
    pub(crate) fn explicit(&mut self, x: &Modes, out: &mut Modes, t: f64) -> Result<()> {
        let len = self.table.grid.len();
        let mm = self.table.len();

        // (u₁,u₂), (u₃,ω₁), (ω₂,ω₃) packed as a + ib
        for (p, buf) in self.fields.iter_mut().enumerate() {
            let (a, b) = (&x[2 * p], &x[2 * p + 1]);
            for (slot, (va, vb)) in self.pack.iter_mut().zip(a.iter().zip(b)) {
                *slot = Complex64::new(va.re - vb.im, va.im + vb.re);
            }
            self.transform.inverse(&self.pack, buf);
        }

        let mut max_u: f64 = 0.0;
        {
            let [f0, f1, f2] = self.fields.as_slice() else { unreachable!() };
            let prods = &mut self.products;
            for i in 0..len {
                let u = [f0[i].re, f0[i].im, f1[i].re];
                let w = [f1[i].im, f2[i].re, f2[i].im];
                let speed = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                if speed > max_u || speed.is_nan() {
                    max_u = speed;
                }
                let q = [
                    u[0] * u[0],
                    u[0] * u[1],
                    u[0] * u[2],
                    u[1] * u[1],
                    u[1] * u[2],
                    u[2] * u[2],
                    u[0] * w[0],
                    u[1] * w[0],
                    u[2] * w[0],
                    u[0] * w[1],
                    u[1] * w[1],
                    u[2] * w[1],
                    u[0] * w[2],
                    u[1] * w[2],
                    u[2] * w[2],
                ];
                for (p, buf) in prods.iter_mut().enumerate() {
                    let im = if 2 * p + 1 < PRODUCTS { q[2 * p + 1] } else { 0.0 };
                    buf[i] = Complex64::new(q[2 * p], im);
                }
            }
        }
        self.last_max_velocity = max_u;
        if !max_u.is_finite() {
            return Err(Error::BlowUp {
                t,
                quantity: "max |u|",
                value: max_u,
            });
        }

        for (buf, modes) in self.products.iter_mut().zip(self.spectral_products.iter_mut()) {
            self.transform.forward(buf, modes);
        }
        let half = 0.5 / len as f64;
        let coupled = matches!(self.coupling, Coupling::Full) as u8 as f64;
        let spec = &self.spectral_products;
        for m in 0..mm {
            let mirror = self.table.mirror[m] as usize;
            let mut q = [Complex64::default(); PRODUCTS + 1];
            for (b, modes) in spec.iter().enumerate() {
                let c = modes[m];
                let cm = modes[mirror].conj();
                let s = (c + cm) * half;
                let d = (c - cm) * half;
                q[2 * b] = s;
                q[2 * b + 1] = Complex64::new(d.im, -d.re);
            }
            let k = self.table.k[m];
            let kk = self.table.ksq[m] as f64;
            let u = [x[0][m], x[1][m], x[2][m]];
            let w = [x[3][m], x[4][m], x[5][m]];
            let curl_u = curl_mode(&u, &k);
            let curl_w = curl_mode(&w, &k);

            // ∂_j(u_j u_i) and ∂_j(u_j ω_i)
            let adv_u: [Complex64; 3] =
                std::array::from_fn(|i| i_times(q[UU[i][0]] * k[0] + q[UU[i][1]] * k[1] + q[UU[i][2]] * k[2], 1.0));
            let adv_w: [Complex64; 3] = std::array::from_fn(|i| {
                let b = 6 + 3 * i;
                i_times(q[b] * k[0] + q[b + 1] * k[1] + q[b + 2] * k[2], 1.0)
            });

            let mut au: [Complex64; 3] = std::array::from_fn(|d| -adv_u[d] + curl_w[d] * coupled);
            if kk > 0.0 {
                let s = (au[0] * k[0] + au[1] * k[1] + au[2] * k[2]) / kk;
                for d in 0..3 {
                    au[d] -= s * k[d];
                }
            }
            let kw = w[0] * k[0] + w[1] * k[1] + w[2] * k[2];
            for d in 0..3 {
                out[d][m] = au[d];
                out[3 + d][m] = -adv_w[d] - kw * k[d] + curl_u[d] * coupled;
            }
        }
        Ok(())
    }

    /// Full time derivative `L x + N(x)` from a precomputed explicit part.
    pub(crate) fn full_derivative(&self, x: &Modes, explicit: &Modes) -> Modes {
        std::array::from_fn(|c| {
            let shift = if c < 3 { 0.0 } else { 2.0 };
            (0..self.table.len())
                .map(|m| explicit[c][m] - x[c][m] * (self.table.ksq[m] as f64 + shift))
                .collect()
        })
    }

    /// Net dissipation `D(x)`, its rate `2 B(x, ẋ)` and `‖∇u‖²` in one pass.
    pub(crate) fn diagnostics(&self, x: &Modes, explicit: &Modes) -> StepDiagnostics {
        let vol = self.table.grid.volume();
        let coupled = matches!(self.coupling, Coupling::Full) as u8 as f64;
        let mut d = 0.0;
        let mut dd = 0.0;
        let mut gu = 0.0;
        for m in 0..self.table.len() {
            let k = self.table.k[m];
            let kk = self.table.ksq[m] as f64;
            let u = [x[0][m], x[1][m], x[2][m]];
            let w = [x[3][m], x[4][m], x[5][m]];
            let du: [Complex64; 3] = std::array::from_fn(|c| explicit[c][m] - u[c] * kk);
            let dw: [Complex64; 3] = std::array::from_fn(|c| explicit[3 + c][m] - w[c] * (kk + 2.0));
            let b = |u: &[Complex64; 3], w: &[Complex64; 3], v: &[Complex64; 3], z: &[Complex64; 3]| -> f64 {
                let mut acc = 0.0;
                for c in 0..3 {
                    acc += kk * (u[c].conj() * v[c]).re + (kk + 2.0) * (w[c].conj() * z[c]).re;
                }
                let kw = w[0] * k[0] + w[1] * k[1] + w[2] * k[2];
                let kz = z[0] * k[0] + z[1] * k[1] + z[2] * k[2];
                acc += (kw.conj() * kz).re;
                if coupled != 0.0 {
                    let cv = curl_mode(v, &k);
                    let cu = curl_mode(u, &k);
                    for c in 0..3 {
                        acc -= (w[c].conj() * cv[c]).re + (z[c].conj() * cu[c]).re;
                    }
                }
                acc
            };
            d += b(&u, &w, &u, &w);
            dd += 2.0 * b(&u, &w, &du, &dw);
            gu += kk * (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr());
        }
        StepDiagnostics {
            net_dissipation: vol * d,
            net_dissipation_rate: vol * dd,
            grad_u_sq: vol * gu,
        }
    }

    /// One Lawson (integrating-factor) RK4 step given `k1 = N(x)`.
    pub(crate) fn lawson_step(&mut self, x: &Modes, k1: &Modes, h: f64, t: f64) -> Result<Modes> {
        let f = match self.factors.take() {
            Some(f) if f.h == h => f,
            _ => Factors::new(h, &self.table.ksq),
        };
        let out = self.lawson_stages(x, k1, h, t, &f);
        self.factors = Some(f);
        out
    }

    fn lawson_stages(&mut self, x: &Modes, k1: &Modes, h: f64, t: f64, f: &Factors) -> Result<Modes> {
        let mut acc = self.table.zeros();
        let mut stage = self.table.zeros();
        let mut k = self.table.zeros();

        for c in 0..6 {
            let (e1, e2) = (f.half(c), f.full(c));
            for m in 0..x[c].len() {
                acc[c][m] = (x[c][m] + k1[c][m] * (h / 6.0)) * e2[m];
                stage[c][m] = (x[c][m] + k1[c][m] * (0.5 * h)) * e1[m];
            }
        }
        self.explicit(&stage, &mut k, t + 0.5 * h)?;
        for c in 0..6 {
            let e1 = f.half(c);
            for m in 0..x[c].len() {
                acc[c][m] += k[c][m] * (e1[m] * h / 3.0);
                stage[c][m] = x[c][m] * e1[m] + k[c][m] * (0.5 * h);
            }
        }
        self.explicit(&stage, &mut k, t + 0.5 * h)?;
        for c in 0..6 {
            let (e1, e2) = (f.half(c), f.full(c));
            for m in 0..x[c].len() {
                acc[c][m] += k[c][m] * (e1[m] * h / 3.0);
                stage[c][m] = x[c][m] * e2[m] + k[c][m] * (e1[m] * h);
            }
        }
        self.explicit(&stage, &mut k, t + h)?;
        for c in 0..6 {
            for m in 0..x[c].len() {
                acc[c][m] += k[c][m] * (h / 6.0);
            }
        }
        Ok(acc)
    }
}

fn curl_mode(v: &[Complex64; 3], k: &[f64; 3]) -> [Complex64; 3] {
    [
        i_times(v[2], k[1]) - i_times(v[1], k[2]),
        i_times(v[0], k[2]) - i_times(v[2], k[0]),
        i_times(v[1], k[0]) - i_times(v[0], k[1]),
    ]
}
