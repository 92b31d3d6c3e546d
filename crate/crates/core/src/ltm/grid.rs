use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Regular voxelization of the hidden volume.
///
/// `origin` is the minimum corner; voxel `(i, j, k)` has linear index
/// `i + nx * (j + ny * k)` and center `origin + (i+½, j+½, k+½) * pitch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoxelGrid {
    pub origin: Vec3,
    pub counts: [usize; 3],
    pub pitch: f64,
}

impl VoxelGrid {
    pub fn new(origin: Vec3, counts: [usize; 3], pitch: f64) -> Result<Self> {
        let g = VoxelGrid {
            origin,
            counts,
            pitch,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "voxel pitch must be positive, got {}",
                self.pitch
            )));
        }
        if self.counts.contains(&0) {
            return Err(Error::InvalidArgument("voxel counts must be at least 1".into()));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidArgument("voxel grid origin is not finite".into()));
        }
        Ok(())
    }

    /// Number of voxels `K_v`.
    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.counts[0] * (j + self.counts[1] * k)
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.counts;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    pub fn center(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.coords(index);
        self.origin
            + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.pitch
    }

    /// Voxel containing `p`, if inside the grid.
    pub fn voxel_of(&self, p: Vec3) -> Option<usize> {
        let rel = (p - self.origin) / self.pitch;
        let mut c = [0usize; 3];
        for axis in 0..3 {
            let x = rel[axis].floor();
            if !(x >= 0.0 && x < self.counts[axis] as f64) {
                return None;
            }
            c[axis] = x as usize;
        }
        Some(self.index(c[0], c[1], c[2]))
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.center(a).distance(self.center(b))
    }
}
