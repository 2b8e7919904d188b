use std::path::Path;
use std::process::{Command, Output};

fn mpdns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpdns"))
        .args(args)
        .env("MPDNS_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn with_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    let body = format!("output_dir = {}\n{body}", dir.join("out").display());
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn constant_omega_energy_decays_at_rate_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=16\ndt=0.01\nt_end=1\ninit=constant_omega\nomega_bar=0.3,-1,2\nmonitor_stride=5");
    let out = mpdns(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("out/monitor.csv"));
    assert_eq!(rows.len(), 21);
    let e0 = rows[0][2];
    for row in &rows {
        let expect = e0 * (-4.0 * row[0]).exp();
        assert!((row[2] / expect - 1.0).abs() < 1e-8, "t={} {} vs {expect}", row[0], row[2]);
        assert_eq!(row[1], 0.0);
    }
    assert!(dir.path().join("out/checkpoint.bin").exists());
}

#[test]
fn zero_horizon_gives_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=8\nt_end=0");
    let out = mpdns(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/monitor.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("t,energy_u,energy_omega,"));
}

#[test]
fn unstable_run_exits_two_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=16\ndt=0.01\nt_end=1\ninit=random\nseed=9\nspectrum_slope=-1\namplitude=2000\nmonitor_stride=1");
    let out = mpdns(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&dir.path().join("out/monitor.csv"));
    assert!(!rows.is_empty() && rows.len() < 101);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    assert!(dir.path().join("out/checkpoint.bin").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=8\nr=1.5");
    let out = mpdns(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0<r<1") && err.contains("line 3"), "{err}");

    let cfg = with_config(dir.path(), "colour=blue");
    assert_eq!(mpdns(&["verify", "--config", &cfg]).status.code(), Some(1));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(mpdns(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(mpdns(&["launch"]).status.code(), Some(1));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let body = "n=16\ndt=0.005\nt_end=0.1\ninit=random\nseed=42\nmonitor_stride=3";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = with_config(d.path(), body);
        assert_eq!(mpdns(&["simulate", "--config", &cfg]).status.code(), Some(0));
    }
    for f in ["monitor.csv", "checkpoint.bin"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn verify_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "");
    let out = mpdns(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks = std::fs::read_to_string(dir.path().join("out/verify_report.csv")).unwrap();
    let ineq = std::fs::read_to_string(dir.path().join("out/inequality_report.csv")).unwrap();
    assert!(checks.lines().count() > 300);
    assert!(ineq.lines().count() > 300);
    assert_eq!(ineq.lines().next(), Some("lemma,params,seed,lhs,rhs,ratio"));
    assert!(checks.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_on_coarsest_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=8\nfamily_size=20\nlp_fields=10");
    let out = mpdns(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_names_the_broken_partition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=16\nfamily_size=5\nlp_fields=5\nfault_injection=partition_profile");
    let out = mpdns(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("partition-of-unity"), "{err}");
    let checks = std::fs::read_to_string(dir.path().join("out/verify_report.csv")).unwrap();
    assert!(checks.lines().any(|l| l.starts_with("partition-of-unity,") && l.ends_with(",false")));
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_config(dir.path(), "n=8\ndt=0.01\nt_end=0.05\ninit=random\nseed=3");
    let out = mpdns(&["sweep", "--config", &cfg, "--param", "r=0.25:0.75:0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for v in ["0.25", "0.50", "0.75"] {
        assert!(dir.path().join(format!("out/r={v}/monitor.csv")).exists());
    }
    let summary = std::fs::read_to_string(dir.path().join("out/sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("r,status,"));

    let bad = mpdns(&["sweep", "--config", &cfg, "--param", "r=0.5:1.5:0.5"]);
    assert_eq!(bad.status.code(), Some(1));
}
