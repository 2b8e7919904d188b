use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpdns::cli;

#[derive(Parser)]
#[command(name = "mpdns", version, about = "Micropolar pseudo-spectral simulator and Besov diagnostics")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write monitor.csv and checkpoint.bin.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the decomposition and inequality suites.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run simulations over a parameter range, e.g. `--param r=0.1:0.9:0.1`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { cli::EXIT_FAILURE } else { cli::EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    if let Err(e) = cli::configure_threads() {
        eprintln!("mpdns: {e}");
        return ExitCode::from(cli::EXIT_FAILURE as u8);
    }
    let path = match &args.command {
        Command::Simulate { config } | Command::Verify { config } | Command::Sweep { config, .. } => config,
    };
    let cfg = match cli::load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mpdns: {}: {e}", path.display());
            return ExitCode::from(cli::EXIT_FAILURE as u8);
        }
    };
    let code = match &args.command {
        Command::Simulate { .. } => cli::cmd_simulate(&cfg),
        Command::Verify { .. } => cli::cmd_verify(&cfg),
        Command::Sweep { param, .. } => cli::cmd_sweep(&cfg, param),
    };
    ExitCode::from(code as u8)
}
