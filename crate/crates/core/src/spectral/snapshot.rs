//! `RNS1` binary snapshots of spectral fields.
//!
//! Layout: magic `RNS1`, `M` as u32 LE, component count as u8, then every
//! coefficient component-major in FFT order as two f64 LE values (re, im).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridSpec, SpectralError, SpectralField};

pub const MAGIC: &[u8; 4] = b"RNS1";
const COMPONENTS: u8 = 3;

pub fn write_snapshot<W: Write>(field: &SpectralField, mut out: W) -> Result<(), SpectralError> {
    out.write_all(MAGIC)?;
    out.write_all(&(field.grid().size() as u32).to_le_bytes())?;
    out.write_all(&[COMPONENTS])?;
    let mut buf = Vec::with_capacity(16 * field.coeffs().len());
    for c in field.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<SpectralField, SpectralError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SpectralError::Snapshot(format!("bad magic {magic:?}")));
    }
    let mut m = [0u8; 4];
    input.read_exact(&mut m)?;
    let grid = GridSpec::new(u32::from_le_bytes(m) as usize)?;
    let mut comps = [0u8; 1];
    input.read_exact(&mut comps)?;
    if comps[0] != COMPONENTS {
        return Err(SpectralError::Snapshot(format!(
            "expected {COMPONENTS} components, found {}",
            comps[0]
        )));
    }
    let mut raw = vec![0u8; 16 * 3 * grid.len()];
    input.read_exact(&mut raw)?;
    let coeffs = raw
        .chunks_exact(16)
        .map(|b| {
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}
