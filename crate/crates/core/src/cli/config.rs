//! Line-based `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Unknown keys, repeated keys
//! and out-of-range values are errors that carry the 1-based line number.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::{Coupling, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    TaylorGreen,
    ConstantOmega,
    Random,
}

impl FromStr for InitKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "taylor_green" => Ok(InitKind::TaylorGreen),
            "constant_omega" => Ok(InitKind::ConstantOmega),
            "random" => Ok(InitKind::Random),
            _ => Err(format!("unknown init '{s}' (taylor_green, constant_omega, random)")),
        }
    }
}

/// Test hook for `verify`: deliberately break one ingredient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FaultInjection {
    #[default]
    None,
    /// Replace the dyadic profile by one whose blocks do not sum to one.
    PartitionProfile,
}

impl FromStr for FaultInjection {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(FaultInjection::None),
            "partition_profile" => Ok(FaultInjection::PartitionProfile),
            _ => Err(format!("unknown fault_injection '{s}' (none, partition_profile)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub r: f64,
    pub monitor_stride: usize,
    pub coupling: Coupling,
    pub init: InitKind,
    pub seed: u64,
    /// Energy spectrum slope of `init = random`.
    pub spectrum_slope: f64,
    /// Multiplies the initial data.
    pub amplitude: f64,
    /// Constant microrotation of `init = constant_omega`.
    pub omega_bar: [f64; 3],
    pub output_dir: PathBuf,
    /// Fields per inequality family in `verify`.
    pub family_size: usize,
    /// Fields per Littlewood–Paley suite in `verify`.
    pub lp_fields: usize,
    /// Band limit of generated fields, clipped to the dealiasing cutoff.
    pub family_kmax: usize,
    pub family_slope: f64,
    pub fault_injection: FaultInjection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        RunConfig {
            n: s.n,
            dt: s.dt,
            t_end: s.t_end,
            r: s.r,
            monitor_stride: s.monitor_stride,
            coupling: s.coupling,
            init: InitKind::TaylorGreen,
            seed: 0,
            spectrum_slope: -5.0 / 3.0,
            amplitude: 1.0,
            omega_bar: [0.0, 0.0, 1.0],
            output_dir: PathBuf::from("out"),
            family_size: 100,
            lp_fields: 50,
            family_kmax: 4,
            family_slope: -1.0,
            fault_injection: FaultInjection::None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "n",
    "dt",
    "t_end",
    "r",
    "monitor_stride",
    "coupling",
    "init",
    "seed",
    "spectrum_slope",
    "amplitude",
    "omega_bar",
    "output_dir",
    "family_size",
    "lp_fields",
    "family_kmax",
    "family_slope",
    "fault_injection",
];

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            r: self.r,
            monitor_stride: self.monitor_stride,
            coupling: self.coupling,
        }
    }

    /// Applies one `key = value` assignment. `line` is only used for errors.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let err = |message: String| Error::ConfigLine { line, message };
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("{key}: cannot parse '{v}'"))
        }
        let finite = |key: &str, v: &str| -> std::result::Result<f64, String> {
            let x: f64 = num(key, v)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("{key} must be finite, got {v}"))
            }
        };
        let positive = |key: &str, v: &str| -> std::result::Result<f64, String> {
            let x = finite(key, v)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(format!("{key} must be positive, got {v}"))
            }
        };
        let count = |key: &str, v: &str| -> std::result::Result<usize, String> {
            let x: usize = num(key, v)?;
            if x >= 1 {
                Ok(x)
            } else {
                Err(format!("{key} must be at least 1"))
            }
        };
        let res: std::result::Result<(), String> = (|| {
            match key {
                "n" => {
                    let n: usize = num(key, value)?;
                    if n < 8 || !n.is_power_of_two() {
                        return Err(format!("n must be a power of two >= 8, got {n}"));
                    }
                    self.n = n;
                }
                "dt" => self.dt = positive(key, value)?,
                "t_end" => {
                    let t = finite(key, value)?;
                    if t < 0.0 {
                        return Err(format!("t_end must be non-negative, got {value}"));
                    }
                    self.t_end = t;
                }
                "r" => {
                    let r = finite(key, value)?;
                    if !(r > 0.0 && r < 1.0) {
                        return Err(format!("r must satisfy 0<r<1, got {value}"));
                    }
                    self.r = r;
                }
                "monitor_stride" => self.monitor_stride = count(key, value)?,
                "coupling" => {
                    self.coupling = match value {
                        "micropolar" => Coupling::Full,
                        "navier_stokes" => Coupling::NavierStokes,
                        _ => return Err(format!("unknown coupling '{value}' (micropolar, navier_stokes)")),
                    }
                }
                "init" => self.init = value.parse()?,
                "seed" => self.seed = num(key, value)?,
                "spectrum_slope" => self.spectrum_slope = finite(key, value)?,
                "amplitude" => self.amplitude = finite(key, value)?,
                "omega_bar" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(format!("omega_bar needs three comma-separated values, got '{value}'"));
                    }
                    for (d, p) in parts.iter().enumerate() {
                        self.omega_bar[d] = finite(key, p)?;
                    }
                }
                "output_dir" => {
                    if value.is_empty() {
                        return Err("output_dir must not be empty".into());
                    }
                    self.output_dir = PathBuf::from(value);
                }
                "family_size" => self.family_size = count(key, value)?,
                "lp_fields" => self.lp_fields = count(key, value)?,
                "family_kmax" => self.family_kmax = count(key, value)?,
                "family_slope" => {
                    self.family_slope = if value == "-inf" {
                        f64::NEG_INFINITY
                    } else {
                        finite(key, value)?
                    }
                }
                "fault_injection" => self.fault_injection = value.parse()?,
                _ => return Err(format!("unknown key '{key}'")),
            }
            Ok(())
        })();
        res.map_err(err)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::ConfigLine {
                line,
                message: format!("expected key=value, got '{body}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(Error::ConfigLine {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
        cfg.set(key, value, line)?;
        seen.push(key.to_string());
    }
    cfg.solver().validate()?;
    Ok(cfg)
}
