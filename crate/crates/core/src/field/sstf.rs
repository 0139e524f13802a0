//! The `SSTF1` binary layout: magic, dim byte, u32 counts, f64 geometry,
//! tolerance and recorded violation, then the little-endian payload.

use std::fs;
use std::path::Path;

use super::{Field, SpaceTimeGrid};
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"SSTF1";

pub fn field_to_bytes(field: &Field) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(header_len(g.dim) + 8 * field.values().len());
    out.extend_from_slice(MAGIC);
    out.push(g.dim as u8);
    for &n in &g.shape {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&(g.nt as u32).to_le_bytes());
    out.extend_from_slice(&g.dx.to_le_bytes());
    out.extend_from_slice(&g.dt.to_le_bytes());
    for &o in &g.origin_x {
        out.extend_from_slice(&o.to_le_bytes());
    }
    out.extend_from_slice(&g.origin_t.to_le_bytes());
    out.extend_from_slice(&field.mono_tol().to_le_bytes());
    out.extend_from_slice(&field.max_violation().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn header_len(dim: usize) -> usize {
    5 + 1 + 4 * (dim + 1) + 8 * 2 * (dim + 1) + 16
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Truncated { needed: end, found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<Field> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(5)?;
    if magic != MAGIC {
        return Err(Error::BadMagic(magic.to_vec()));
    }
    let dim = r.take(1)?[0] as usize;
    if !(1..=2).contains(&dim) {
        return Err(Error::Header(format!("dimension {dim} not supported")));
    }
    let mut shape = Vec::with_capacity(dim);
    for _ in 0..dim {
        shape.push(r.u32()? as usize);
    }
    let nt = r.u32()? as usize;
    let dx = r.f64()?;
    let dt = r.f64()?;
    let mut origin_x = Vec::with_capacity(dim);
    for _ in 0..dim {
        origin_x.push(r.f64()?);
    }
    let origin_t = r.f64()?;
    let mono_tol = r.f64()?;
    let max_violation = r.f64()?;
    let grid = SpaceTimeGrid::new(shape, nt, dx, dt, origin_x, origin_t).map_err(|e| Error::Header(e.to_string()))?;

    let rest = &bytes[r.pos..];
    if rest.len() % 8 != 0 || rest.len() / 8 != grid.len() {
        if rest.len() < 8 * grid.len() {
            return Err(Error::Truncated { needed: r.pos + 8 * grid.len(), found: bytes.len() });
        }
        return Err(Error::ShapeMismatch { expected: grid.len(), found: rest.len() / 8 });
    }
    let values = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Field::with_recorded(grid, values, mono_tol, max_violation)
}

pub fn write_field(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, field_to_bytes(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    field_from_bytes(&fs::read(path)?)
}
