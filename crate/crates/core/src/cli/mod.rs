//! Configuration parsing and the `simulate`, `verify` and `sweep` commands.

mod commands;
mod config;
mod verify;

pub use commands::{
    cmd_simulate, cmd_sweep, cmd_verify, configure_threads, initial_state, parse_sweep_param, simulate,
    sweep_configs, SweepParam, CHECKPOINT_FILE, EXIT_BLOW_UP, EXIT_FAILURE, EXIT_OK, INEQUALITY_FILE, MONITOR_FILE,
    SWEEP_FILE, VERIFY_FILE,
};
pub use config::{parse_config, FaultInjection, InitKind, RunConfig, KEYS};
pub use verify::{
    orthogonality_defect, reconstruction_defect, run_verify, side_condition_defect, CheckRow, VerifyReport,
    CHECK_CSV_HEADER,
};

/// Reads and parses a configuration file.
pub fn load_config(path: &std::path::Path) -> crate::Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
