//! Binary checkpoint format for spectral states.
//!
//! Layout: magic bytes `"KDE1"`, little-endian `u32` nx, ny, nz, three
//! little-endian `f64` for the Bloch offset, then `3·nx·ny·nz` coefficients
//! as interleaved little-endian `f64` (re, im), component-major with modes in
//! row-major lattice order (the in-memory layout of [`SpectralField`]).

use super::field::SpectralField;
use super::grid::Grid3;
use crate::error::{Error, Result};
use crate::Complex;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"KDE1";

pub fn write_checkpoint(path: &Path, field: &SpectralField) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(&CHECKPOINT_MAGIC)?;
    for n in [field.grid.nx(), field.grid.ny(), field.grid.nz()] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for j in field.bloch_j {
        w.write_all(&j.to_le_bytes())?;
    }
    for c in &field.coeffs {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<SpectralField> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_into(&mut r, &mut magic)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadCheckpoint(format!(
            "bad magic {magic:?}, expected {CHECKPOINT_MAGIC:?}"
        )));
    }

    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut buf = [0u8; 4];
        read_into(&mut r, &mut buf)?;
        *d = u32::from_le_bytes(buf) as usize;
    }
    let grid = Grid3::new(dims[0], dims[1], dims[2])
        .map_err(|_| Error::BadCheckpoint(format!("invalid grid dimensions {dims:?}")))?;

    let mut bloch_j = [0.0f64; 3];
    for j in &mut bloch_j {
        *j = read_f64(&mut r)?;
    }

    let mut field = SpectralField::zeros_bloch(grid, bloch_j);
    for c in field.coeffs.iter_mut() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        *c = Complex::new(re, im);
    }

    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::BadCheckpoint("trailing bytes after coefficients".into()));
    }
    Ok(field)
}

fn read_into<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::BadCheckpoint("truncated file".into()))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_into(r, &mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
