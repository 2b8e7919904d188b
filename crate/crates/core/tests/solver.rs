use mpdns::monitor::MonitorRecord;
use mpdns::solver::{
    constant_omega_init, random_init, rhs, rhs_with, run, step, taylor_green_init, Coupling, Integrator, RunStatus,
    SimState, SolverConfig,
};
use mpdns::spectral::{curl, divergence, gradient, make_grid, SpectralScalarField, SpectralVectorField};

fn grad_sq(v: &SpectralVectorField) -> f64 {
    v.components().iter().map(|c| gradient(c).norm_sq()).sum()
}

fn max_diff(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    a.sub(b).unwrap().max_abs_coeff()
}

#[test]
fn rhs_of_constant_rotation() {
    let g = make_grid(8).unwrap();
    let w = [0.3, -1.0, 2.0];
    let (du, dw) = rhs(&constant_omega_init(&g, w)).unwrap();
    assert_eq!(du.max_abs_coeff(), 0.0);
    let expect = SpectralVectorField::from_fn(&g, |_, _, _| w.map(|v| -2.0 * v));
    assert!(max_diff(&dw, &expect) < 1e-15);
}

#[test]
fn rhs_of_shear_flow() {
    let g = make_grid(16).unwrap();
    let u = SpectralVectorField::from_fn(&g, |_, _, z| [z.sin(), 0.0, 0.0]);
    let s = SimState {
        u: u.clone(),
        omega: SpectralVectorField::zeros(&g),
        t: 0.0,
    };
    let (du, dw) = rhs(&s).unwrap();
    assert!(max_diff(&du, &u.scaled(-1.0)) < 1e-14);
    let expect = SpectralVectorField::from_fn(&g, |_, _, z| [0.0, z.cos(), 0.0]);
    assert!(max_diff(&dw, &expect) < 1e-14);
}

#[test]
fn rhs_energy_identity_on_random_state() {
    let g = make_grid(16).unwrap();
    let s = random_init(&g, 42, -2.0);
    let w = &s.omega;
    let dissipation = grad_sq(&s.u) + grad_sq(w) + 2.0 * w.norm_sq() + divergence(w).norm_sq();
    let exchange = 2.0 * curl(&s.u).inner(w).unwrap();

    let (du, dw) = rhs(&s).unwrap();
    assert!(du.is_solenoidal(), "defect {}", du.solenoidal_defect());
    let rate = s.u.inner(&du).unwrap() + w.inner(&dw).unwrap();
    let expect = -dissipation + exchange;
    assert!((rate - expect).abs() <= 1e-8 * dissipation, "{rate} vs {expect}");
    // the coupling term does not vanish for generic data
    assert!(exchange.abs() > 1e-3 * dissipation);

    let (du, dw) = rhs_with(&s, Coupling::NavierStokes).unwrap();
    let rate = s.u.inner(&du).unwrap() + w.inner(&dw).unwrap();
    assert!((rate + dissipation).abs() <= 1e-8 * dissipation);
}

#[test]
fn rhs_dealiases_products() {
    let g = make_grid(16).unwrap();
    let s = random_init(&g, 1, 0.0);
    let (du, dw) = rhs(&s).unwrap();
    assert_eq!(max_diff(&du, &du.dealiased()), 0.0);
    assert_eq!(max_diff(&dw, &dw.dealiased()), 0.0);
    assert!(du.hermitian_defect() < 1e-12 && dw.hermitian_defect() < 1e-12);
}

#[test]
fn nan_input_is_a_blow_up() {
    let g = make_grid(8).unwrap();
    let u = SpectralVectorField::from_fn(&g, |x, _, _| [0.0, f64::NAN * x, 0.0]);
    let s = SimState {
        u,
        omega: SpectralVectorField::zeros(&g),
        t: 0.5,
    };
    match rhs(&s) {
        Err(mpdns::Error::BlowUp { t, .. }) => assert_eq!(t, 0.5),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn constant_rotation_decays_exactly() {
    let g = make_grid(8).unwrap();
    let init = constant_omega_init(&g, [0.0, 0.0, 1.0]);
    let n0 = init.omega.norm_sq().sqrt();
    let mut integ = Integrator::new(&g, Coupling::Full);
    let mut s = init;
    for _ in 0..100 {
        s = integ.step(&s, 0.01).unwrap();
    }
    let ratio = s.omega.norm_sq().sqrt() / n0;
    assert!((ratio / (-2.0f64).exp() - 1.0).abs() < 1e-12);
    assert!((ratio - 0.135335).abs() < 1e-6);
    assert!((s.t - 1.0).abs() < 1e-12);
}

#[test]
fn zero_state_stays_zero() {
    let g = make_grid(8).unwrap();
    let mut s = SimState::zeros(&g);
    for _ in 0..5 {
        s = step(&s, 0.01).unwrap();
    }
    assert_eq!(s.u.max_abs_coeff(), 0.0);
    assert_eq!(s.omega.max_abs_coeff(), 0.0);
}

#[test]
fn velocity_stays_solenoidal() {
    let g = make_grid(16).unwrap();
    let mut integ = Integrator::new(&g, Coupling::Full);
    let mut s = random_init(&g, 5, -3.0);
    for _ in 0..1000 {
        s = integ.step(&s, 5e-3).unwrap();
    }
    assert!(s.u.is_solenoidal(), "defect {}", s.u.solenoidal_defect());
    assert!(s.u.max_abs_coeff() > 0.0);
}

#[test]
fn navier_stokes_mode_keeps_rotation_zero() {
    let g = make_grid(16).unwrap();
    let cfg = SolverConfig {
        n: 16,
        dt: 5e-3,
        t_end: 0.2,
        monitor_stride: 5,
        coupling: Coupling::NavierStokes,
        ..Default::default()
    };
    let init = taylor_green_init(&g);
    let out = run(&cfg, &init, &mut |_| {}).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    // only transform round-off reaches ω
    assert!(out.state.omega.max_abs_coeff() < 1e-15 * out.state.u.max_abs_coeff());
    assert!(out.state.u.norm_sq() < init.u.norm_sq());

    let full = run(&SolverConfig { coupling: Coupling::Full, ..cfg }, &init, &mut |_| {}).unwrap();
    assert!(full.state.omega.max_abs_coeff() > 1e-3);
}

#[test]
fn zero_horizon_returns_initial_state() {
    let g = make_grid(8).unwrap();
    let init = random_init(&g, 2, -2.0);
    let cfg = SolverConfig {
        n: 8,
        t_end: 0.0,
        ..Default::default()
    };
    let mut records = Vec::new();
    let out = run(&cfg, &init, &mut |r| records.push(r.clone())).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(out.steps, 0);
    assert_eq!(out.state.u.component(0).coeffs(), init.u.component(0).coeffs());
    assert_eq!(out.status, RunStatus::Completed);
}

#[test]
fn records_follow_stride_and_end_on_time() {
    let g = make_grid(8).unwrap();
    let cfg = SolverConfig {
        n: 8,
        dt: 0.03,
        t_end: 0.5,
        monitor_stride: 4,
        ..Default::default()
    };
    let mut ts = Vec::new();
    let out = run(&cfg, &taylor_green_init(&g), &mut |r| ts.push(r.t)).unwrap();
    assert_eq!(out.steps, 17);
    assert_eq!(ts.len(), 1 + 4 + 1);
    assert_eq!(*ts.last().unwrap(), 0.5);
    assert!((ts[1] - 0.12).abs() < 1e-15);
}

#[test]
fn taylor_green_energy_is_non_increasing() {
    let g = make_grid(32).unwrap();
    let cfg = SolverConfig {
        n: 32,
        dt: 2e-3,
        t_end: 0.3,
        monitor_stride: 5,
        ..Default::default()
    };
    let mut rs: Vec<MonitorRecord> = Vec::new();
    run(&cfg, &taylor_green_init(&g), &mut |r| rs.push(r.clone())).unwrap();
    assert!(rs.windows(2).all(|w| w[1].total_energy() < w[0].total_energy()));
    // the energy inequality with every dissipation term, including the exchange
    let e0 = rs[0].total_energy();
    for r in &rs {
        assert!(r.total_energy() + r.net_dissipation_integral.unwrap() <= e0 * (1.0 + 1e-12));
    }
}

#[test]
fn cfl_violation_blows_up_with_finite_records() {
    let g = make_grid(16).unwrap();
    let cfg = SolverConfig {
        n: 16,
        dt: 0.01,
        t_end: 5.0,
        monitor_stride: 1,
        ..Default::default()
    };
    let init = random_init(&g, 9, -1.0).scaled(2000.0);
    let mut rs: Vec<MonitorRecord> = Vec::new();
    let out = run(&cfg, &init, &mut |r| rs.push(r.clone())).unwrap();
    assert!(matches!(out.status, RunStatus::BlowUp { .. }), "{:?}", out.status);
    assert!(!rs.is_empty());
    assert!(rs.iter().all(|r| r.grad_u_sq.is_finite() && r.besov_d3u.is_finite()));
    assert_eq!(&out.last_record, rs.last().unwrap());
}

#[test]
fn config_validation() {
    let ok = SolverConfig::default();
    assert!(ok.validate().is_ok());
    for bad in [
        SolverConfig { r: 1.0, ..ok.clone() },
        SolverConfig { r: 0.0, ..ok.clone() },
        SolverConfig { dt: 0.0, ..ok.clone() },
        SolverConfig { n: 48, ..ok.clone() },
        SolverConfig { monitor_stride: 0, ..ok.clone() },
        SolverConfig { dt: 0.01, ..ok.clone() },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
    let g = make_grid(64).unwrap();
    let s = ok.stability(&g, 1.0);
    assert!(s.stiffness < 1.5 && s.cfl < 0.05);
}

#[test]
fn runs_are_deterministic() {
    let g = make_grid(16).unwrap();
    let cfg = SolverConfig {
        n: 16,
        dt: 5e-3,
        t_end: 0.1,
        monitor_stride: 2,
        ..Default::default()
    };
    let init = random_init(&g, 11, -2.0);
    let collect = || {
        let mut rows = Vec::new();
        run(&cfg, &init, &mut |r| rows.push(r.csv_row())).unwrap();
        rows
    };
    assert_eq!(collect(), collect());
}

#[test]
fn mean_velocity_is_preserved() {
    let g = make_grid(16).unwrap();
    let mut s = random_init(&g, 3, -2.0);
    let mut c = s.u.component(0).coeffs().to_vec();
    c[0] = 0.7.into();
    let u0 = SpectralScalarField::from_coeffs(&g, c).unwrap();
    let comps = s.u.clone().into_components();
    s.u = SpectralVectorField::new([u0, comps[1].clone(), comps[2].clone()]).unwrap();
    let next = step(&s, 1e-2).unwrap();
    assert!((next.u.component(0).mean() - 0.7).abs() < 1e-14);
}

/// `(a·∇)b` built from grid products of `a_j` and `∂_j b_i`, then dealiased.
fn advective_oracle(a: &SpectralVectorField, b: &SpectralVectorField) -> SpectralVectorField {
    use mpdns::spectral::{partial_derivative, to_spectral, Axis};
    let g = a.grid().clone();
    let ap = a.to_physical();
    let comps: Vec<SpectralScalarField> = (0..3)
        .map(|i| {
            let mut acc = vec![0.0; g.len()];
            for (j, axis) in Axis::ALL.iter().enumerate() {
                let d = partial_derivative(b.component(i), *axis).to_physical();
                for p in 0..g.len() {
                    acc[p] += ap[j][p] * d[p];
                }
            }
            to_spectral(&g, &acc).unwrap().dealiased()
        })
        .collect();
    let [x, y, z]: [SpectralScalarField; 3] = comps.try_into().unwrap();
    SpectralVectorField::new([x, y, z]).unwrap()
}

#[test]
fn rhs_matches_term_by_term_oracle() {
    use mpdns::spectral::{grad_div, leray_project, vector_laplacian};
    let g = make_grid(16).unwrap();
    let s = random_init(&g, 21, -1.5);
    let (u, w) = (&s.u, &s.omega);
    let du = leray_project(
        &advective_oracle(u, u)
            .scaled(-1.0)
            .add(&vector_laplacian(u))
            .unwrap()
            .add(&curl(w))
            .unwrap(),
    );
    let dw = advective_oracle(u, w)
        .scaled(-1.0)
        .add(&vector_laplacian(w))
        .unwrap()
        .add(&grad_div(w))
        .unwrap()
        .add(&curl(u))
        .unwrap()
        .sub(&w.scaled(2.0))
        .unwrap();
    let (got_u, got_w) = rhs(&s).unwrap();
    let scale = du.max_abs_coeff().max(dw.max_abs_coeff());
    assert!(max_diff(&got_u, &du) < 1e-12 * scale, "{}", max_diff(&got_u, &du) / scale);
    assert!(max_diff(&got_w, &dw) < 1e-12 * scale, "{}", max_diff(&got_w, &dw) / scale);
}
