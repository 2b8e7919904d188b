//! Per-time diagnostics along a trajectory: energies, dissipation norms and
//! the one-directional criterion `∫ ‖∂₃u‖_{Ḃ^{-r}_{∞,∞}}^{2/(1-r)} dt`.

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm, build_partition, BesovParams, DyadicPartition};
use crate::solver::SimState;
use crate::spectral::{partial_derivative, Axis, Grid, SpectralVectorField};

pub const CSV_HEADER: &str = "t,energy_u,energy_omega,grad_u_sq,grad_omega_sq,d3u_sq,grad_d3u_sq,\
laplacian_u_sq,div_omega_sq,besov_d3u,criterion_integrand,criterion_accum,lnY";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    /// `½‖u‖²`
    pub energy_u: f64,
    /// `½‖ω‖²`
    pub energy_omega: f64,
    pub grad_u_sq: f64,
    pub grad_omega_sq: f64,
    pub d3u_sq: f64,
    pub grad_d3u_sq: f64,
    pub laplacian_u_sq: f64,
    pub div_omega_sq: f64,
    /// `2⟨∇×u, ω⟩`, the energy exchanged through the curl coupling.
    pub coupling_exchange: f64,
    pub besov_d3u: f64,
    pub criterion_integrand: f64,
    pub criterion_accum: f64,
    /// `‖∇u‖² + ‖∇ω‖² + e`
    pub y: f64,
    pub ln_y: f64,
    /// `∫₀ᵗ D ds` with `D` the net dissipation rate, when the producer
    /// integrated it along the trajectory.
    pub net_dissipation_integral: Option<f64>,
}

impl MonitorRecord {
    pub fn total_energy(&self) -> f64 {
        self.energy_u + self.energy_omega
    }

    /// `-d/dt[½(‖u‖²+‖ω‖²)]` with all coupling switched on.
    pub fn net_dissipation(&self) -> f64 {
        self.grad_u_sq + self.grad_omega_sq + 4.0 * self.energy_omega + self.div_omega_sq - self.coupling_exchange
    }

    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.energy_u,
            self.energy_omega,
            self.grad_u_sq,
            self.grad_omega_sq,
            self.d3u_sq,
            self.grad_d3u_sq,
            self.laplacian_u_sq,
            self.div_omega_sq,
            self.besov_d3u,
            self.criterion_integrand,
            self.criterion_accum,
            self.ln_y,
        ];
        v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",")
    }
}

/// Computes records for states on one grid at a fixed `r`.
pub struct Monitor {
    partition: DyadicPartition,
    r: f64,
}

impl Monitor {
    pub fn new(grid: &Arc<Grid>, r: f64) -> Result<Monitor> {
        Monitor::with_partition(build_partition(grid), r)
    }

    pub fn with_partition(partition: DyadicPartition, r: f64) -> Result<Monitor> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("r must satisfy 0<r<1, got {r}")));
        }
        Ok(Monitor { partition, r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    /// All fields except `criterion_accum` and `net_dissipation_integral`.
    pub fn snapshot(&self, state: &SimState) -> Result<MonitorRecord> {
        let g = state.grid().clone();
        let [u1, u2, u3] = state.u.components().each_ref().map(|c| c.coeffs());
        let [w1, w2, w3] = state.omega.components().each_ref().map(|c| c.coeffs());
        let k_sq = g.k_squared();
        let mut s = [0.0f64; 9];
        for idx in 0..g.len() {
            let k = g.derivative_k(idx);
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let u = [u1[idx], u2[idx], u3[idx]];
            let w = [w1[idx], w2[idx], w3[idx]];
            let uu = u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr();
            let ww = w[0].norm_sqr() + w[1].norm_sqr() + w[2].norm_sqr();
            let kw = w[0] * k[0] + w[1] * k[1] + w[2] * k[2];
            let curl_u = [
                i_times(u[2], k[1]) - i_times(u[1], k[2]),
                i_times(u[0], k[2]) - i_times(u[2], k[0]),
                i_times(u[1], k[0]) - i_times(u[0], k[1]),
            ];
            let k3 = k[2] * k[2];
            s[0] += uu;
            s[1] += ww;
            s[2] += kk * uu;
            s[3] += kk * ww;
            s[4] += k3 * uu;
            s[5] += kk * k3 * uu;
            s[6] += k_sq[idx] * k_sq[idx] * uu;
            s[7] += kw.norm_sqr();
            s[8] += (0..3).map(|d| (w[d].conj() * curl_u[d]).re).sum::<f64>();
        }
        let vol = g.volume();
        let s = s.map(|v| v * vol);

        let d3u = SpectralVectorField::from_components(state.u.components().each_ref().map(|c| partial_derivative(c, Axis::X3)));
        let besov = besov_norm(&d3u, BesovParams::new(-self.r, f64::INFINITY, f64::INFINITY)?, &self.partition)?;
        let y = s[2] + s[3] + std::f64::consts::E;
        let rec = MonitorRecord {
            t: state.t,
            energy_u: 0.5 * s[0],
            energy_omega: 0.5 * s[1],
            grad_u_sq: s[2],
            grad_omega_sq: s[3],
            d3u_sq: s[4],
            grad_d3u_sq: s[5],
            laplacian_u_sq: s[6],
            div_omega_sq: s[7],
            coupling_exchange: 2.0 * s[8],
            besov_d3u: besov,
            criterion_integrand: besov.powf(2.0 / (1.0 - self.r)),
            criterion_accum: 0.0,
            y,
            ln_y: y.ln(),
            net_dissipation_integral: None,
        };
        for (quantity, value) in [
            ("energy", rec.energy_u + rec.energy_omega),
            ("grad_u_sq", rec.grad_u_sq),
            ("laplacian_u_sq", rec.laplacian_u_sq),
            ("besov_d3u", rec.besov_d3u),
        ] {
            if !value.is_finite() {
                return Err(Error::BlowUp { t: state.t, quantity, value });
            }
        }
        Ok(rec)
    }
}

fn i_times(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-c.im * k, c.re * k)
}

/// One-off [`Monitor::snapshot`].
pub fn snapshot(state: &SimState, r: f64) -> Result<MonitorRecord> {
    Monitor::new(state.grid(), r)?.snapshot(state)
}

/// Extend the running criterion integral from `prev` to `next` by one
/// trapezoid.
pub fn accumulate_step(prev: &MonitorRecord, next: &mut MonitorRecord) {
    next.criterion_accum =
        prev.criterion_accum + 0.5 * (next.t - prev.t) * (prev.criterion_integrand + next.criterion_integrand);
}

/// Fill `criterion_accum` by the trapezoid rule, starting from zero at the
/// first record.
pub fn accumulate(records: &mut [MonitorRecord]) -> Result<()> {
    check_sorted(records)?;
    if let Some(first) = records.first_mut() {
        first.criterion_accum = 0.0;
    }
    for i in 1..records.len() {
        let (head, tail) = records.split_at_mut(i);
        accumulate_step(&head[i - 1], &mut tail[0]);
    }
    Ok(())
}

fn check_sorted(records: &[MonitorRecord]) -> Result<()> {
    for i in 1..records.len() {
        if !(records[i].t >= records[i - 1].t) {
            return Err(Error::Unsorted { index: i });
        }
    }
    Ok(())
}

fn trapezoid(records: &[MonitorRecord], f: impl Fn(&MonitorRecord) -> f64) -> f64 {
    records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBudget {
    /// `(t, residual)` for each interval between consecutive records, with
    /// residual `Δ(½‖u‖²+½‖ω‖²) + ∫ D dt`.
    pub residuals: Vec<(f64, f64)>,
    pub max_abs: f64,
    /// `max_abs` divided by the initial total energy (or by 1 when that is 0).
    pub max_relative: f64,
    /// Residual of the whole trajectory, relative like `max_relative`.
    pub cumulative_relative: f64,
    /// Whether `½(‖u‖²+‖ω‖²)` never increased between records.
    pub energy_non_increasing: bool,
}

/// Energy-balance residuals. The dissipation integral comes from
/// `net_dissipation_integral` when every record has it, otherwise from the
/// trapezoid rule on the recorded rates.
pub fn energy_budget_report(records: &[MonitorRecord]) -> Result<EnergyBudget> {
    check_sorted(records)?;
    let integrated = records.iter().all(|r| r.net_dissipation_integral.is_some());
    let mut residuals = Vec::with_capacity(records.len().saturating_sub(1));
    let mut non_increasing = true;
    for w in records.windows(2) {
        let de = w[1].total_energy() - w[0].total_energy();
        let diss = if integrated {
            w[1].net_dissipation_integral.unwrap() - w[0].net_dissipation_integral.unwrap()
        } else {
            trapezoid(w, MonitorRecord::net_dissipation)
        };
        residuals.push((w[1].t, de + diss));
        if de > 0.0 {
            non_increasing = false;
        }
    }
    let scale = match records.first() {
        Some(r) if r.total_energy() > 0.0 => r.total_energy(),
        _ => 1.0,
    };
    let max_abs = residuals.iter().fold(0.0f64, |m, &(_, r)| m.max(r.abs()));
    let total: f64 = residuals.iter().map(|&(_, r)| r).sum();
    Ok(EnergyBudget {
        residuals,
        max_abs,
        max_relative: max_abs / scale,
        cumulative_relative: total.abs() / scale,
        energy_non_increasing: non_increasing,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GronwallSummary {
    pub ln_y_final: f64,
    pub sup_gradient_sum: f64,
    /// `∫ ‖∇u‖² Y dt`
    pub grad_u_times_y: f64,
    /// `∫ ‖∇u‖² (‖∇u‖² + ‖∇ω‖²) dt`
    pub grad_u_times_gradient_sum: f64,
    pub criterion_integral: f64,
    pub ln_y_non_increasing: bool,
}

impl GronwallSummary {
    pub fn is_finite(&self) -> bool {
        [
            self.ln_y_final,
            self.sup_gradient_sum,
            self.grad_u_times_y,
            self.grad_u_times_gradient_sum,
            self.criterion_integral,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Raw ingredients of the Gronwall bound on `Y`; no constants are applied.
pub fn gronwall_report(records: &[MonitorRecord]) -> Result<GronwallSummary> {
    check_sorted(records)?;
    let Some(last) = records.last() else {
        return Err(Error::InvalidParameter("gronwall_report needs at least one record".into()));
    };
    Ok(GronwallSummary {
        ln_y_final: last.ln_y,
        sup_gradient_sum: records
            .iter()
            .fold(0.0f64, |m, r| m.max(r.grad_u_sq + r.grad_omega_sq)),
        grad_u_times_y: trapezoid(records, |r| r.grad_u_sq * r.y),
        grad_u_times_gradient_sum: trapezoid(records, |r| r.grad_u_sq * (r.grad_u_sq + r.grad_omega_sq)),
        criterion_integral: trapezoid(records, |r| r.criterion_integrand),
        ln_y_non_increasing: records.windows(2).all(|w| w[1].ln_y <= w[0].ln_y),
    })
}

pub fn write_csv<W: Write>(out: &mut W, records: &[MonitorRecord]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::SmoothBump;
    use crate::littlewood_paley::RadialProfile;
    use crate::solver::{constant_omega_init, taylor_green_init};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn rec(t: f64, integrand: f64) -> MonitorRecord {
        MonitorRecord {
            t,
            criterion_integrand: integrand,
            ..Default::default()
        }
    }

    #[test]
    fn zero_state_is_all_zero() {
        let g = make_grid(8).unwrap();
        let r = snapshot(&SimState::zeros(&g), 0.5).unwrap();
        assert_eq!(r.total_energy(), 0.0);
        assert_eq!(r.besov_d3u, 0.0);
        assert_eq!(r.criterion_integrand, 0.0);
        assert_eq!(r.ln_y, 1.0);
    }

    #[test]
    fn x3_independent_flow_has_no_criterion() {
        let g = make_grid(16).unwrap();
        let u = SpectralVectorField::from_fn(&g, |x, y, _| [y.sin(), x.cos(), (x + y).sin()]);
        let s = SimState {
            u,
            omega: SpectralVectorField::zeros(&g),
            t: 0.0,
        };
        let r = snapshot(&s, 0.3).unwrap();
        assert!(r.grad_u_sq > 0.0);
        assert_eq!(r.d3u_sq, 0.0);
        assert_eq!(r.besov_d3u, 0.0);
        assert_eq!(r.criterion_integrand, 0.0);
    }

    #[test]
    fn shear_in_x3_matches_block_evaluation() {
        // ∂₃u = (cos x₃, 0, 0); blocks j = -1, 0 see |k| = 1 with weights
        // φ(2) and φ(1), and a single-mode block has sup norm equal to its weight.
        let g = make_grid(16).unwrap();
        let r = 0.4;
        let u = SpectralVectorField::from_fn(&g, |_, _, z| [z.sin(), 0.0, 0.0]);
        let s = SimState {
            u,
            omega: SpectralVectorField::zeros(&g),
            t: 0.0,
        };
        let rec = snapshot(&s, r).unwrap();
        let p = SmoothBump;
        let expect = (2f64.powf(-r * -1.0) * p.phi(2.0)).max(p.phi(1.0));
        assert!((rec.besov_d3u - expect).abs() < 1e-12, "{} vs {expect}", rec.besov_d3u);
        assert!((rec.d3u_sq - 4.0 * PI.powi(3)).abs() < 1e-9);
        assert!((rec.grad_d3u_sq - 4.0 * PI.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn taylor_green_norms() {
        let g = make_grid(16).unwrap();
        let rec = snapshot(&taylor_green_init(&g), 0.5).unwrap();
        let e = PI.powi(3);
        assert!((rec.energy_u - e).abs() < 1e-10);
        assert!((rec.grad_u_sq - 3.0 * 2.0 * e).abs() < 1e-9);
        assert!((rec.laplacian_u_sq - 9.0 * 2.0 * e).abs() < 1e-9);
        assert!((rec.d3u_sq - 2.0 * e).abs() < 1e-9);
        assert_eq!(rec.energy_omega, 0.0);
    }

    #[test]
    fn coupling_exchange_of_beltrami_pair() {
        // u = (sin z, cos z, 0) has ∇×u = u, so with ω = u the exchange is 2‖u‖².
        let g = make_grid(8).unwrap();
        let u = SpectralVectorField::from_fn(&g, |_, _, z| [z.sin(), z.cos(), 0.0]);
        let s = SimState {
            u: u.clone(),
            omega: u.clone(),
            t: 0.0,
        };
        let rec = snapshot(&s, 0.5).unwrap();
        assert!((rec.coupling_exchange - 2.0 * u.norm_sq()).abs() < 1e-9);
    }

    #[test]
    fn accumulation_is_exact_for_linear_integrands() {
        let mut rs: Vec<_> = (0..=10).map(|i| rec(i as f64 / 10.0, 3.0)).collect();
        accumulate(&mut rs).unwrap();
        assert!((rs[10].criterion_accum - 3.0).abs() < 1e-14);
        let mut rs: Vec<_> = (0..=10).map(|i| rec(i as f64 / 10.0, i as f64 / 10.0)).collect();
        accumulate(&mut rs).unwrap();
        assert!((rs[10].criterion_accum - 0.5).abs() < 1e-14);
        assert!(rs.windows(2).all(|w| w[1].criterion_accum >= w[0].criterion_accum));
    }

    #[test]
    fn unsorted_records_are_rejected() {
        let mut rs = vec![rec(0.0, 1.0), rec(0.2, 1.0), rec(0.1, 1.0)];
        assert!(matches!(accumulate(&mut rs), Err(Error::Unsorted { index: 2 })));
        assert!(energy_budget_report(&rs).is_err());
    }

    #[test]
    fn budget_of_zero_run_is_zero() {
        let rs: Vec<_> = (0..5).map(|i| rec(i as f64, 0.0)).collect();
        let b = energy_budget_report(&rs).unwrap();
        assert_eq!(b.max_abs, 0.0);
        assert!(b.energy_non_increasing);
    }

    #[test]
    fn budget_of_analytic_damping() {
        // ω(t) = ω̄ e^{-2t}: ½‖ω‖² = E₀ e^{-4t} and D = 4·½‖ω‖².
        let g = make_grid(8).unwrap();
        let base = snapshot(&constant_omega_init(&g, [0.0, 0.0, 1.0]), 0.5).unwrap();
        let e0 = base.energy_omega;
        let rs: Vec<_> = (0..=100)
            .map(|i| {
                let t = i as f64 / 100.0;
                MonitorRecord {
                    t,
                    energy_omega: e0 * (-4.0 * t).exp(),
                    net_dissipation_integral: Some(e0 * (1.0 - (-4.0 * t).exp())),
                    ..Default::default()
                }
            })
            .collect();
        let b = energy_budget_report(&rs).unwrap();
        assert!(b.max_relative < 1e-12);
        let mut without: Vec<_> = rs.clone();
        for r in without.iter_mut() {
            r.net_dissipation_integral = None;
        }
        // trapezoid on e^{-4t} with h = 0.01 is accurate to about h²·16/12
        assert!(energy_budget_report(&without).unwrap().max_relative < 1e-5);
    }

    #[test]
    fn gronwall_of_zero_trajectory() {
        let g = make_grid(8).unwrap();
        let z = snapshot(&SimState::zeros(&g), 0.5).unwrap();
        let rs: Vec<_> = (0..4)
            .map(|i| MonitorRecord {
                t: i as f64,
                ..z.clone()
            })
            .collect();
        let s = gronwall_report(&rs).unwrap();
        assert_eq!(s.ln_y_final, 1.0);
        assert!(s.ln_y_non_increasing && s.is_finite());
        assert_eq!(s.criterion_integral, 0.0);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec(0.5, 1.0 / 3.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 13);
        assert_eq!(row[0], "5.0000000000000000e-1");
        assert_eq!(row[10].parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
