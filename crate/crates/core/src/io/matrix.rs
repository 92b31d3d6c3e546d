//! Transport matrix export: a CSV of nonzero entries plus the NLTM binary
//! companion.
//!
//! NLTM layout after the common magic/version header: `u32` matrix kind
//! code, `u32` grid counts (3), `f64` grid origin (3), `f64` pitch, `u32`
//! number of stored columns, then per column in ascending source order a
//! `u32` source index followed by one `f64` per voxel.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::bytes::{sized, Reader, Writer};
use crate::error::{Error, FormatError, Result};
use crate::ltm::{MatrixKind, TransportMatrix, VoxelGrid};

pub const MAGIC: [u8; 4] = *b"NLTM";

/// CSV text with a header `a,b,value` and one row per nonzero entry in
/// ascending `(a, b)` order. Values use the shortest decimal form that
/// parses back to the same `f64`.
pub fn matrix_csv(t: &TransportMatrix) -> String {
    let mut out = String::from("a,b,value\n");
    for (a, b, v) in t.nonzeros() {
        let _ = writeln!(out, "{a},{b},{v:?}");
    }
    out
}

pub fn encode_matrix(t: &TransportMatrix) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(&MAGIC);
    w.u32(t.kind.code());
    for n in t.grid.counts {
        w.u32(n as u32);
    }
    w.vec3(t.grid.origin);
    w.f64(t.grid.pitch);
    w.u32(t.columns.len() as u32);
    for (&a, col) in &t.columns {
        w.u32(a as u32);
        for &v in col {
            w.f64(v);
        }
    }
    w.buf
}

pub fn decode_matrix(bytes: &[u8]) -> Result<TransportMatrix, FormatError> {
    let mut r = Reader::new(bytes);
    r.header(&MAGIC)?;
    let code = r.u32()?;
    let kind = MatrixKind::from_code(code)
        .ok_or_else(|| FormatError::Malformed(format!("unknown matrix kind {code}")))?;
    let counts = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let origin = r.vec3()?;
    let pitch = r.f64()?;
    let grid = VoxelGrid::new(origin, counts, pitch).map_err(|e| FormatError::Malformed(e.to_string()))?;
    let ncols = r.u32()? as usize;
    let column_bytes = sized(&[grid.len()], 8)? + 4;
    let payload = r.payload(sized(&[ncols, column_bytes], 1)?)?;

    let mut columns = BTreeMap::new();
    for (c, chunk) in payload.chunks_exact(column_bytes).enumerate() {
        let a = u32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as usize;
        if a >= grid.len() || columns.contains_key(&a) {
            return Err(FormatError::Malformed(format!("bad source index {a} in column {c}")));
        }
        let mut col = Vec::with_capacity(grid.len());
        for (b, s) in chunk[4..].chunks_exact(8).enumerate() {
            let mut x = [0u8; 8];
            x.copy_from_slice(s);
            let v = f64::from_le_bytes(x);
            let flat = c * grid.len() + b;
            if !v.is_finite() {
                return Err(FormatError::NonFinite(flat));
            }
            if v < 0.0 {
                return Err(FormatError::Negative(flat));
            }
            col.push(v);
        }
        columns.insert(a, col);
    }
    Ok(TransportMatrix { grid, kind, columns })
}

/// Path of the binary companion written next to a CSV export.
pub fn companion_path(csv: &Path) -> PathBuf {
    csv.with_extension("nltm")
}

/// Write `path` (CSV) and its `.nltm` companion.
pub fn export_matrix(t: &TransportMatrix, path: &Path) -> Result<()> {
    super::write_file(path, matrix_csv(t).as_bytes())?;
    super::write_file(&companion_path(path), &encode_matrix(t))
}

pub fn read_matrix(path: &Path) -> Result<TransportMatrix> {
    let bytes = super::read_file(path)?;
    decode_matrix(&bytes).map_err(|e| Error::format(path, e))
}
