use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::monitor::{MonitorRecord, CSV_HEADER};
use crate::solver::{
    constant_omega_init, random_init, run, taylor_green_init, write_checkpoint, RunOutcome, RunStatus, SimState,
};
use crate::spectral::make_grid;

use super::config::{InitKind, RunConfig};
use super::verify::run_verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;

pub const MONITOR_FILE: &str = "monitor.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const VERIFY_FILE: &str = "verify_report.csv";
pub const INEQUALITY_FILE: &str = "inequality_report.csv";
pub const SWEEP_FILE: &str = "sweep_summary.csv";

pub fn initial_state(cfg: &RunConfig) -> Result<SimState> {
    let grid = make_grid(cfg.n)?;
    let s = match cfg.init {
        InitKind::TaylorGreen => taylor_green_init(&grid),
        InitKind::ConstantOmega => constant_omega_init(&grid, cfg.omega_bar),
        InitKind::Random => random_init(&grid, cfg.seed, cfg.spectrum_slope),
    };
    Ok(if cfg.amplitude == 1.0 { s } else { s.scaled(cfg.amplitude) })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs the solver, streaming records into `monitor.csv` so that a blow-up
/// leaves the rows written so far, then stores the final state.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    let init = initial_state(cfg)?;
    let mut csv = create(&cfg.output_dir, MONITOR_FILE)?;
    writeln!(csv, "{CSV_HEADER}")?;
    let mut io_error: Option<std::io::Error> = None;
    let mut sink = |rec: &MonitorRecord| {
        if io_error.is_none() {
            if let Err(e) = writeln!(csv, "{}", rec.csv_row()) {
                io_error = Some(e);
            }
        }
    };
    let outcome = run(&cfg.solver(), &init, &mut sink);
    csv.flush()?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let outcome = outcome?;
    write_checkpoint(&cfg.output_dir.join(CHECKPOINT_FILE), &outcome.state, cfg.dt)?;
    Ok(outcome)
}

pub fn cmd_simulate(cfg: &RunConfig) -> i32 {
    match simulate(cfg) {
        Ok(out) => match out.status {
            RunStatus::Completed => {
                println!(
                    "completed {} steps to t={}, criterion_accum={:.6e}",
                    out.steps, out.state.t, out.last_record.criterion_accum
                );
                EXIT_OK
            }
            RunStatus::BlowUp { t, quantity, value } => {
                eprintln!("blow-up at t={t}: {quantity}={value:e}; last finite state written");
                EXIT_BLOW_UP
            }
        },
        Err(e) => {
            eprintln!("simulate: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let result = (|| -> Result<Vec<&'static str>> {
        let report = run_verify(cfg)?;
        let mut f = create(&cfg.output_dir, VERIFY_FILE)?;
        report.write_checks(&mut f)?;
        f.flush()?;
        let mut f = create(&cfg.output_dir, INEQUALITY_FILE)?;
        report.write_inequalities(&mut f)?;
        f.flush()?;
        println!(
            "{} invariant rows, {} inequality rows",
            report.checks.len(),
            report.inequalities.len()
        );
        Ok(report.failures())
    })();
    match result {
        Ok(failed) if failed.is_empty() => EXIT_OK,
        Ok(failed) => {
            eprintln!("verify: failed checks: {}", failed.join(", "));
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("verify: {e}");
            EXIT_FAILURE
        }
    }
}

/// `key=start:stop:step`, inclusive on both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepParam {
    pub key: String,
    /// Values as they are written into the per-run configuration.
    pub values: Vec<String>,
}

fn decimals(s: &str) -> usize {
    s.split_once('.').map(|(_, f)| f.trim_end_matches(|c: char| !c.is_ascii_digit()).len()).unwrap_or(0)
}

pub fn parse_sweep_param(spec: &str) -> Result<SweepParam> {
    let bad = |m: String| Error::Config(format!("--param {spec}: {m}"));
    let (key, range) = spec.split_once('=').ok_or_else(|| bad("expected key=start:stop:step".into()))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step".into()));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad(format!("cannot parse '{p}'"))))
        .collect::<Result<_>>()?;
    let (a, b, h) = (nums[0], nums[1], nums[2]);
    if !(a.is_finite() && b.is_finite() && h.is_finite() && h > 0.0 && b >= a) {
        return Err(bad("need finite start <= stop and step > 0".into()));
    }
    let count = ((b - a) / h + 1e-9).floor() as usize + 1;
    let digits = parts.iter().map(|p| decimals(p)).max().unwrap_or(0);
    let values = (0..count).map(|i| format!("{:.*}", digits, a + i as f64 * h)).collect();
    Ok(SweepParam {
        key: key.trim().to_string(),
        values,
    })
}

/// Per-run configurations, each with its own output directory.
pub fn sweep_configs(base: &RunConfig, param: &SweepParam) -> Result<Vec<RunConfig>> {
    if matches!(param.key.as_str(), "output_dir" | "init" | "coupling" | "omega_bar" | "fault_injection") {
        return Err(Error::Config(format!("cannot sweep over '{}'", param.key)));
    }
    param
        .values
        .iter()
        .map(|v| {
            let mut c = base.clone();
            c.set(&param.key, v, 0)?;
            c.output_dir = base.output_dir.join(format!("{}={}", param.key, v));
            c.solver().validate()?;
            Ok(c)
        })
        .collect()
}

pub fn cmd_sweep(base: &RunConfig, param: &str) -> i32 {
    let configs = match parse_sweep_param(param).and_then(|p| Ok((sweep_configs(base, &p)?, p))) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sweep: {e}");
            return EXIT_FAILURE;
        }
    };
    let (configs, p) = configs;
    let outcomes: Vec<Result<RunOutcome>> = configs.par_iter().map(simulate).collect();

    let mut code = EXIT_OK;
    let mut rows = Vec::new();
    for ((cfg, v), out) in configs.iter().zip(&p.values).zip(&outcomes) {
        let dir: PathBuf = cfg.output_dir.clone();
        match out {
            Ok(o) => {
                let status = match o.status {
                    RunStatus::Completed => "completed",
                    RunStatus::BlowUp { .. } => {
                        code = code.max(EXIT_BLOW_UP);
                        "blow_up"
                    }
                };
                rows.push(format!(
                    "{v},{status},{},{:.16e},{:.16e}",
                    o.steps, o.state.t, o.last_record.criterion_accum
                ));
            }
            Err(e) => {
                eprintln!("sweep: {} failed: {e}", dir.display());
                code = EXIT_FAILURE;
                rows.push(format!("{v},error,0,,"));
            }
        }
    }
    // a config error outranks a blow-up
    if outcomes.iter().any(|o| o.is_err()) {
        code = EXIT_FAILURE;
    }
    let written = (|| -> Result<()> {
        let mut f = create(&base.output_dir, SWEEP_FILE)?;
        writeln!(f, "{},status,steps,t_final,criterion_accum", p.key)?;
        for r in rows {
            writeln!(f, "{r}")?;
        }
        f.flush()?;
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("sweep: {e}");
        return EXIT_FAILURE;
    }
    code
}

/// Caps rayon's global pool at `MPDNS_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("MPDNS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Config(format!("MPDNS_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}
