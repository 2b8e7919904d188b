//! Binary snapshot: magic `MPDNS1`, then `n` (u64), `t` and `dt` (f64), then
//! the six physical arrays `u₁ u₂ u₃ ω₁ ω₂ ω₃`, all little-endian, `x₁`
//! varying fastest.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{make_grid, to_physical_many, to_spectral, SpectralVectorField};

use super::SimState;

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"MPDNS1";

pub fn write_checkpoint(path: &Path, state: &SimState, dt: f64) -> Result<()> {
    let grid = state.grid();
    let fields: Vec<_> = state.u.components().iter().chain(state.omega.components()).collect();
    let arrays = to_physical_many(&fields);
    let mut out = Vec::with_capacity(30 + 6 * 8 * grid.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&dt.to_le_bytes());
    for a in &arrays {
        for v in a {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Returns the state and the stored `dt`.
pub fn read_checkpoint(path: &Path) -> Result<(SimState, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 30 || &bytes[..6] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("missing MPDNS1 header".into()));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(6)) as usize;
    let t = f64::from_le_bytes(word(14));
    let dt = f64::from_le_bytes(word(22));
    let grid = make_grid(n).map_err(|e| Error::Checkpoint(format!("bad grid size: {e}")))?;
    let len = grid.len();
    if bytes.len() != 30 + 6 * 8 * len {
        return Err(Error::Checkpoint(format!(
            "expected {} bytes for n={n}, found {}",
            30 + 6 * 8 * len,
            bytes.len()
        )));
    }
    let mut fields = Vec::with_capacity(6);
    for f in 0..6 {
        let base = 30 + f * 8 * len;
        let samples: Vec<f64> = (0..len).map(|i| f64::from_le_bytes(word(base + 8 * i))).collect();
        fields.push(to_spectral(&grid, &samples)?);
    }
    let mut it = fields.into_iter();
    let mut vec3 = || SpectralVectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]);
    let u = vec3()?;
    let omega = vec3()?;
    Ok((SimState { u, omega, t }, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::random_init;

    #[test]
    fn round_trip() {
        let g = make_grid(8).unwrap();
        let s = random_init(&g, 3, -2.0).with_time(0.25);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        write_checkpoint(&path, &s, 1e-3).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..6], b"MPDNS1");
        assert_eq!(bytes.len(), 30 + 6 * 8 * 512);
        let (back, dt) = read_checkpoint(&path).unwrap();
        assert_eq!(dt, 1e-3);
        assert_eq!(back.t, 0.25);
        assert!(back.u.sub(&s.u).unwrap().max_abs_coeff() < 1e-14);
        assert!(back.omega.sub(&s.omega).unwrap().max_abs_coeff() < 1e-14);
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTACHECKPOINT-------------------").unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Checkpoint(_))));
    }
}
