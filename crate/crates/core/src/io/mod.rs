//! File formats and configuration.
//!
//! All binary formats share the same conventions: a four-byte magic, a
//! little-endian `u32` version, little-endian integers and IEEE floats.

mod bytes;
pub mod config;
pub mod image;
pub mod matrix;
pub mod nlir;
pub mod volume;

pub use config::{load_run_config, load_scene, RunConfig, SceneFile};
pub use image::{export_image, mip_pixels};
pub use matrix::{decode_matrix, encode_matrix, export_matrix, matrix_csv, read_matrix};
pub use nlir::{decode_nlir, encode_nlir, read_nlir, write_nlir};
pub use volume::{read_volume, write_volume, Volume, VolumeKind};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Read the magic bytes of a file, if it has at least four.
pub fn sniff_magic(path: &Path) -> Result<Option<[u8; 4]>> {
    let bytes = read_file(path)?;
    Ok(bytes.get(..4).map(|m| [m[0], m[1], m[2], m[3]]))
}
