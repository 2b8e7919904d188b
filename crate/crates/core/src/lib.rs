//! Pseudo-spectral simulation of the incompressible micropolar fluid system
//! on the periodic box, together with Littlewood–Paley / Besov tooling for
//! monitoring a one-directional regularity criterion along trajectories.

pub mod cli;
pub mod error;
pub mod inequality;
pub mod littlewood_paley;
pub mod monitor;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
