//! Binary field snapshots.
//!
//! Layout, all little-endian: 16-byte magic `AXIBOUSS-FLD\0\0\0\x01`,
//! `u32 nr`, `u32 nz`, `f64 Lr`, `f64 Lz`, `u8 parity` (0 even, 1 odd),
//! then `nr * nz` `f64` values in r-major order. A snapshot file may hold
//! several such records back to back.

use std::io::{Read, Write};

use super::{MeridionalGrid, Parity, ScalarField2D};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 16] = *b"AXIBOUSS-FLD\0\0\0\x01";

pub fn write_field<W: Write>(mut w: W, f: &ScalarField2D) -> Result<()> {
    let g = f.grid();
    w.write_all(&MAGIC)?;
    w.write_all(&(g.nr() as u32).to_le_bytes())?;
    w.write_all(&(g.nz() as u32).to_le_bytes())?;
    w.write_all(&g.lr().to_le_bytes())?;
    w.write_all(&g.lz().to_le_bytes())?;
    w.write_all(&[match f.parity() {
        Parity::Even => 0u8,
        Parity::Odd => 1u8,
    }])?;
    let mut buf = Vec::with_capacity(8 * g.len());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(false);
            }
            return Err(Error::Format("truncated snapshot header".into()));
        }
        filled += n;
    }
    Ok(true)
}

/// Reads the next record, or `None` at a clean end of stream.
pub fn read_next<R: Read>(mut r: R) -> Result<Option<ScalarField2D>> {
    let mut magic = [0u8; 16];
    if !read_exact_or_eof(&mut r, &mut magic)? {
        return Ok(None);
    }
    if magic != MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let mut head = [0u8; 4 + 4 + 8 + 8 + 1];
    r.read_exact(&mut head)
        .map_err(|_| Error::Format("truncated snapshot header".into()))?;
    let nr = u32::from_le_bytes(head[0..4].try_into().unwrap()) as usize;
    let nz = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let lr = f64::from_le_bytes(head[8..16].try_into().unwrap());
    let lz = f64::from_le_bytes(head[16..24].try_into().unwrap());
    let parity = match head[24] {
        0 => Parity::Even,
        1 => Parity::Odd,
        p => return Err(Error::Format(format!("unknown parity tag {p}"))),
    };
    let grid = MeridionalGrid::new(nr, nz, lr, lz)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut raw)
        .map_err(|_| Error::Format("truncated snapshot payload".into()))?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarField2D::new(grid, values, parity).map(Some)
}

pub fn read_field<R: Read>(r: R) -> Result<ScalarField2D> {
    read_next(r)?.ok_or_else(|| Error::Format("empty snapshot".into()))
}

/// Reads every record in the stream.
pub fn read_fields<R: Read>(mut r: R) -> Result<Vec<ScalarField2D>> {
    let mut out = Vec::new();
    while let Some(f) = read_next(&mut r)? {
        out.push(f);
    }
    Ok(out)
}
