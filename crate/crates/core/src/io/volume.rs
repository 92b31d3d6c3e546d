//! NLVX: a scalar field over a voxel grid (direct image, occupancy mask,
//! in-focus indirect light or a single LTM column).
//!
//! Layout after the common magic/version header: `u32` content kind,
//! `u32` counts along x, y, z, `f64` grid origin (3), `f64` pitch, `f64`
//! auxiliary value (the threshold for masks, 0 otherwise), then one `f64`
//! per voxel in grid index order.

use std::path::Path;

use super::bytes::{sized, Reader, Writer};
use crate::error::{Error, FormatError, Result};
use crate::ltm::{DirectImage, OccupancyMask, VoxelGrid};

pub const MAGIC: [u8; 4] = *b"NLVX";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    Direct,
    Mask,
    Indirect,
    Column,
}

impl VolumeKind {
    fn code(self) -> u32 {
        match self {
            VolumeKind::Direct => 0,
            VolumeKind::Mask => 1,
            VolumeKind::Indirect => 2,
            VolumeKind::Column => 3,
        }
    }

    fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => VolumeKind::Direct,
            1 => VolumeKind::Mask,
            2 => VolumeKind::Indirect,
            3 => VolumeKind::Column,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub kind: VolumeKind,
    pub grid: VoxelGrid,
    pub aux: f64,
    pub values: Vec<f64>,
}

impl Volume {
    pub fn from_direct(img: &DirectImage) -> Self {
        Volume {
            kind: VolumeKind::Direct,
            grid: img.grid,
            aux: 0.0,
            values: img.values.clone(),
        }
    }

    pub fn from_mask(mask: &OccupancyMask) -> Self {
        Volume {
            kind: VolumeKind::Mask,
            grid: mask.grid,
            aux: mask.epsilon,
            values: mask.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn into_direct(self) -> Result<DirectImage, FormatError> {
        self.expect(VolumeKind::Direct)?;
        Ok(DirectImage {
            grid: self.grid,
            values: self.values,
        })
    }

    pub fn into_mask(self) -> Result<OccupancyMask, FormatError> {
        self.expect(VolumeKind::Mask)?;
        Ok(OccupancyMask {
            grid: self.grid,
            bits: self.values.iter().map(|&v| v != 0.0).collect(),
            epsilon: self.aux,
        })
    }

    fn expect(&self, kind: VolumeKind) -> Result<(), FormatError> {
        if self.kind != kind {
            return Err(FormatError::Malformed(format!(
                "expected a {kind:?} volume, found {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

pub fn encode_volume(v: &Volume) -> Vec<u8> {
    let mut w = Writer::default();
    w.header(&MAGIC);
    w.u32(v.kind.code());
    for n in v.grid.counts {
        w.u32(n as u32);
    }
    w.vec3(v.grid.origin);
    w.f64(v.grid.pitch);
    w.f64(v.aux);
    for &x in &v.values {
        w.f64(x);
    }
    w.buf
}

pub fn decode_volume(bytes: &[u8]) -> Result<Volume, FormatError> {
    let mut r = Reader::new(bytes);
    r.header(&MAGIC)?;
    let code = r.u32()?;
    let kind = VolumeKind::from_code(code)
        .ok_or_else(|| FormatError::Malformed(format!("unknown volume kind {code}")))?;
    let counts = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let origin = r.vec3()?;
    let pitch = r.f64()?;
    let aux = r.f64()?;
    let grid = VoxelGrid::new(origin, counts, pitch).map_err(|e| FormatError::Malformed(e.to_string()))?;
    let payload = r.payload(sized(&counts, 8)?)?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, c) in payload.chunks_exact(8).enumerate() {
        let mut a = [0u8; 8];
        a.copy_from_slice(c);
        let x = f64::from_le_bytes(a);
        if !x.is_finite() {
            return Err(FormatError::NonFinite(i));
        }
        values.push(x);
    }
    Ok(Volume {
        kind,
        grid,
        aux,
        values,
    })
}

pub fn write_volume(v: &Volume, path: &Path) -> Result<()> {
    super::write_file(path, &encode_volume(v))
}

pub fn read_volume(path: &Path) -> Result<Volume> {
    let bytes = super::read_file(path)?;
    decode_volume(&bytes).map_err(|e| Error::format(path, e))
}
