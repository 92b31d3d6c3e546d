//! Maximum-intensity projections written as binary PGM.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ltm::VoxelGrid;

/// Projected 8-bit image. Pixels are row-major, `width` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    /// Largest value in the input; pixel = round(255 * value / max).
    pub max: f64,
}

/// Project `values` (one per voxel of `grid`) along `axis` by taking the
/// maximum. Of the two remaining grid axes the lower one runs across
/// columns and the higher one down the rows, with row 0 at its far end, so
/// projecting along depth (axis 1) gives a front view with z up.
pub fn mip_pixels(values: &[f64], grid: &VoxelGrid, axis: usize) -> Result<Projection> {
    if axis > 2 {
        return Err(Error::InvalidArgument(format!("projection axis {axis} is not 0, 1 or 2")));
    }
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values for a grid of {} voxels",
            values.len(),
            grid.len()
        )));
    }
    let (cu, cv) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let (width, height) = (grid.counts[cu], grid.counts[cv]);
    let mut proj = vec![0.0f64; width * height];
    for (i, &v) in values.iter().enumerate() {
        let c = grid.coords(i);
        let px = c[cu] + width * (height - 1 - c[cv]);
        proj[px] = proj[px].max(v);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let pixels = proj
        .iter()
        .map(|&v| {
            if max > 0.0 {
                (255.0 * v / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    Ok(Projection {
        width,
        height,
        pixels,
        max,
    })
}

/// Sidecar file recording how an image was normalized.
pub fn sidecar_path(pgm: &Path) -> PathBuf {
    pgm.with_extension("txt")
}

pub fn export_image(values: &[f64], grid: &VoxelGrid, axis: usize, path: &Path) -> Result<()> {
    let p = mip_pixels(values, grid, axis)?;
    let mut bytes = format!("P5\n{} {}\n255\n", p.width, p.height).into_bytes();
    bytes.extend_from_slice(&p.pixels);
    super::write_file(path, &bytes)?;
    let scale = if p.max > 0.0 { 255.0 / p.max } else { 0.0 };
    let note = format!(
        "projection_axis {axis}\nmax {:?}\nscale {:?}\n",
        p.max, scale
    );
    super::write_file(&sidecar_path(path), note.as_bytes())
}
