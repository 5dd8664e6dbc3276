//! Binary field container.
//!
//! Layout, all little-endian: the 8-byte magic `BLWFIELD`, a `u32` version,
//! the grid descriptor `N: u64, L: f64, M: u64, T: f64` (`M = 0, T = 0` for a
//! spatial field), a `u8` representation code, then the complex samples as
//! interleaved `f64` real/imaginary pairs in row-major lattice order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Repr, SpacetimeField, SpacetimeGrid, SpatialGrid, C64};

pub const MAGIC: &[u8; 8] = b"BLWFIELD";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 8 + 4 + 8 + 8 + 8 + 8 + 1;

/// Contents of a container file.
#[derive(Debug, Clone, PartialEq)]
pub enum Stored {
    Spatial(Field),
    Spacetime(SpacetimeField),
}

fn encode(n: usize, l: f64, m: usize, t: f64, repr: Repr, data: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&l.to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.push(repr.code());
    for z in data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn encode_field(f: &Field) -> Vec<u8> {
    let g = f.grid();
    encode(g.n(), g.half_len(), 0, 0.0, f.repr(), f.data())
}

pub fn encode_spacetime(f: &SpacetimeField) -> Vec<u8> {
    let g = f.grid();
    let s = g.spatial();
    encode(s.n(), s.half_len(), g.m(), g.half_time(), f.repr(), f.data())
}

fn word<const K: usize>(bytes: &[u8], at: usize) -> [u8; K] {
    bytes[at..at + K].try_into().expect("slice length checked")
}

pub fn decode(bytes: &[u8]) -> Result<Stored> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Load(format!(
            "header needs {HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Load("bad magic".into()));
    }
    let version = u32::from_le_bytes(word(bytes, 8));
    if version != VERSION {
        return Err(Error::Load(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(word(bytes, 12));
    let l = f64::from_le_bytes(word(bytes, 20));
    let m = u64::from_le_bytes(word(bytes, 28));
    let t = f64::from_le_bytes(word(bytes, 36));
    let repr =
        Repr::from_code(bytes[44]).ok_or_else(|| Error::Load(format!("unknown representation {}", bytes[44])))?;
    let load = |e: Error| Error::Load(e.to_string());
    let n = usize::try_from(n).map_err(|_| Error::Load(format!("N = {n} too large")))?;
    let m = usize::try_from(m).map_err(|_| Error::Load(format!("M = {m} too large")))?;
    let spatial = SpatialGrid::new(n, l).map_err(load)?;
    let count = spatial
        .len()
        .checked_mul(m.max(1))
        .ok_or_else(|| Error::Load("sample count overflows".into()))?;
    let expected = HEADER_LEN + 16 * count;
    if bytes.len() != expected {
        return Err(Error::Load(format!(
            "payload should be {expected} bytes for {count} samples, file has {}",
            bytes.len()
        )));
    }
    let data: Vec<C64> = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| C64::new(f64::from_le_bytes(word(c, 0)), f64::from_le_bytes(word(c, 8))))
        .collect();
    if m == 0 {
        if t != 0.0 {
            return Err(Error::Load(format!("spatial field with T = {t}")));
        }
        Field::from_parts(spatial, repr, data)
            .map(Stored::Spatial)
            .map_err(load)
    } else {
        let grid = SpacetimeGrid::new(spatial, m, t).map_err(load)?;
        SpacetimeField::from_parts(grid, repr, data)
            .map(Stored::Spacetime)
            .map_err(load)
    }
}

pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    Ok(std::fs::write(path, encode_field(f))?)
}

pub fn write_spacetime(path: &Path, f: &SpacetimeField) -> Result<()> {
    Ok(std::fs::write(path, encode_spacetime(f))?)
}

pub fn read(path: &Path) -> Result<Stored> {
    decode(&std::fs::read(path)?)
}

/// Reads a container that must hold a spatial field.
pub fn read_field(path: &Path) -> Result<Field> {
    match read(path)? {
        Stored::Spatial(f) => Ok(f),
        Stored::Spacetime(_) => Err(Error::Load(format!("{} holds a space-time field", path.display()))),
    }
}

/// Reads a container that must hold a space-time field.
pub fn read_spacetime(path: &Path) -> Result<SpacetimeField> {
    match read(path)? {
        Stored::Spacetime(f) => Ok(f),
        Stored::Spatial(_) => Err(Error::Load(format!("{} holds a spatial field", path.display()))),
    }
}
