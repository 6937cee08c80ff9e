//! Binary snapshot of a [`SolverState`].
//!
//! Layout (little endian):
//!
//! ```text
//! magic        8 bytes  "TRMCKPT\0"
//! version      u32      1
//! scalar_bits  u32      32 or 64
//! n            u64
//! box_length   f64
//! t            f64
//! step_index   u64
//! components   u64
//! count        u64      components * n * n * (n/2 + 1)
//! coeffs       count * (re f64, im f64)
//! ```
//!
//! Every scalar is widened to `f64`, which is exact for both supported widths.

use std::io::{self, Read, Write};

use num_complex::Complex;
use thiserror::Error;

use super::SolverState;
use crate::error::ConfigError;
use crate::scalar::Real;
use crate::spectral::{GridSpec, SpectralField};

const MAGIC: &[u8; 8] = b"TRMCKPT\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint holds {found}-bit scalars, expected {expected}")]
    ScalarWidth { expected: u32, found: u32 },
    #[error("invalid checkpoint contents: {0}")]
    Contents(#[from] ConfigError),
}

fn scalar_bits<T>() -> u32 {
    (std::mem::size_of::<T>() * 8) as u32
}

pub fn write_checkpoint<T: Real, W: Write>(mut w: W, state: &SolverState<T>) -> Result<(), CheckpointError> {
    let grid = state.u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&scalar_bits::<T>().to_le_bytes())?;
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.box_length().to_f64_lossy().to_le_bytes())?;
    w.write_all(&state.t.to_f64_lossy().to_le_bytes())?;
    w.write_all(&state.step_index.to_le_bytes())?;
    w.write_all(&(state.u.components() as u64).to_le_bytes())?;
    w.write_all(&(state.u.data().len() as u64).to_le_bytes())?;
    for z in state.u.data() {
        w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
        w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<SolverState<T>, CheckpointError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let bits = read_u32(&mut r)?;
    if bits != scalar_bits::<T>() {
        return Err(CheckpointError::ScalarWidth {
            expected: scalar_bits::<T>(),
            found: bits,
        });
    }
    let n = read_u64(&mut r)? as usize;
    let length = T::of(read_f64(&mut r)?);
    let t = T::of(read_f64(&mut r)?);
    let step_index = read_u64(&mut r)?;
    let components = read_u64(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    let grid = GridSpec::new(n, length)?;
    if count != components * grid.spectral_len() {
        return Err(ConfigError::DimensionMismatch {
            expected: components * grid.spectral_len(),
            found: count,
        }
        .into());
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let re = T::of(read_f64(&mut r)?);
        let im = T::of(read_f64(&mut r)?);
        data.push(Complex::new(re, im));
    }
    let u = SpectralField::from_coefficients(grid, components, data)?;
    Ok(SolverState { t, u, step_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, Fft3};

    #[test]
    fn round_trip_is_exact() {
        let g = GridSpec::<f64>::new(8, 1.7).unwrap();
        let state = SolverState {
            t: 0.123456789,
            u: random_field(&Fft3::new(g), 3, 9, None),
            step_index: 42,
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &state).unwrap();
        let back: SolverState<f64> = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn single_precision_round_trip_is_exact() {
        let g = GridSpec::<f32>::new(8, 1.0).unwrap();
        let state = SolverState {
            t: 0.5f32,
            u: random_field(&Fft3::new(g), 3, 2, None),
            step_index: 3,
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &state).unwrap();
        assert_eq!(read_checkpoint::<f32, _>(buf.as_slice()).unwrap(), state);
        assert!(matches!(
            read_checkpoint::<f64, _>(buf.as_slice()),
            Err(CheckpointError::ScalarWidth { expected: 64, found: 32 })
        ));
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(matches!(
            read_checkpoint::<f64, _>(&b"NOTACKPTxxxxxxxx"[..]),
            Err(CheckpointError::BadMagic)
        ));
        let mut buf = Vec::new();
        write_checkpoint(
            &mut buf,
            &SolverState {
                t: 0.0,
                u: SpectralField::<f64>::zeros(GridSpec::new(8, 1.0).unwrap(), 3),
                step_index: 0,
            },
        )
        .unwrap();
        buf.truncate(buf.len() - 5);
        assert!(matches!(read_checkpoint::<f64, _>(buf.as_slice()), Err(CheckpointError::Io(_))));
    }
}
