use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::VoxelGrid;
use crate::error::{Error, Result};

/// Diagonal probe of the transport matrix: direct light per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectImage {
    pub grid: VoxelGrid,
    pub values: Vec<f64>,
}

impl DirectImage {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the brightest voxel (lowest index on ties).
    pub fn argmax(&self) -> usize {
        argmax(&self.values)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// How the occupancy threshold ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Threshold {
    /// ε used as given.
    Absolute(f64),
    /// ε = ρ · max(I_d).
    Relative(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(0.05)
    }
}

impl Threshold {
    pub fn resolve(&self, img: &DirectImage) -> Result<f64> {
        let (v, eps) = match *self {
            Threshold::Absolute(e) => (e, e),
            Threshold::Relative(rho) => (rho, rho * img.max()),
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "occupancy threshold must be finite and >= 0, got {v}"
            )));
        }
        Ok(eps)
    }
}

/// Voxels whose direct light exceeds ε.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMask {
    pub grid: VoxelGrid,
    pub bits: Vec<bool>,
    pub epsilon: f64,
}

impl OccupancyMask {
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

/// Occupancy oracle: `bits[v] = values[v] > epsilon` (strict).
pub fn occupancy_from_direct(img: &DirectImage, epsilon: f64) -> Result<OccupancyMask> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(OccupancyMask {
        grid: img.grid,
        bits: img.values.iter().map(|&v| v > epsilon).collect(),
        epsilon,
    })
}

/// The boolean matrix `m ⊗ m`, stored by its generating vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskMatrix {
    bits: Vec<bool>,
}

impl MaskMatrix {
    pub fn size(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a] && self.bits[b]
    }

    /// Elementwise AND. The AND of two outer products is the outer product
    /// of the ANDed vectors.
    pub fn and(&self, other: &MaskMatrix) -> MaskMatrix {
        MaskMatrix {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        (0..self.size())
            .map(|a| (0..self.size()).map(|b| self.get(a, b)).collect())
            .collect()
    }

    /// Zero every entry of `t` outside the mask.
    pub fn apply(&self, t: &TransportMatrix) -> TransportMatrix {
        let mut out = t.clone();
        out.kind = MatrixKind::Masked;
        for (&a, col) in out.columns.iter_mut() {
            for (b, v) in col.iter_mut().enumerate() {
                if !self.get(a, b) {
                    *v = 0.0;
                }
            }
        }
        out
    }
}

pub fn mask_outer(mask: &OccupancyMask) -> MaskMatrix {
    MaskMatrix {
        bits: mask.bits.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Naive,
    Gated2Bounce,
    GatedHigher,
    Masked,
}

impl MatrixKind {
    pub fn code(self) -> u32 {
        match self {
            MatrixKind::Naive => 0,
            MatrixKind::Gated2Bounce => 1,
            MatrixKind::GatedHigher => 2,
            MatrixKind::Masked => 3,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => MatrixKind::Naive,
            1 => MatrixKind::Gated2Bounce,
            2 => MatrixKind::GatedHigher,
            3 => MatrixKind::Masked,
            _ => return None,
        })
    }
}

/// `K_v × K_v` transport matrix. Entry `(a, b)` is the light imaged at voxel
/// `b` when illumination focuses at voxel `a`; only the columns of probed
/// sources `a` are stored, each dense over `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMatrix {
    pub grid: VoxelGrid,
    pub kind: MatrixKind,
    pub columns: BTreeMap<usize, Vec<f64>>,
}

impl TransportMatrix {
    pub fn new(grid: VoxelGrid, kind: MatrixKind) -> Self {
        TransportMatrix {
            grid,
            kind,
            columns: BTreeMap::new(),
        }
    }

    pub fn insert_column(&mut self, source: usize, column: Vec<f64>) -> Result<()> {
        if source >= self.grid.len() || column.len() != self.grid.len() {
            return Err(Error::InvalidArgument(format!(
                "column {source} of length {} does not fit a grid of {} voxels",
                column.len(),
                self.grid.len()
            )));
        }
        if let Some(b) = column.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "entry ({source}, {b}) is negative or non-finite"
            )));
        }
        self.columns.insert(source, column);
        Ok(())
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.columns.get(&a).map_or(0.0, |c| c[b])
    }

    /// Nonzero entries in ascending `(a, b)` order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns.iter().flat_map(|(&a, col)| {
            col.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(b, &v)| (a, b, v))
        })
    }

    /// Sum of all entries.
    pub fn total_energy(&self) -> f64 {
        self.columns.values().flat_map(|c| c.iter()).sum()
    }
}

/// Half-open range `[min, max)` of source-to-destination distance, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min >= 0.0 && min < max) || min.is_infinite() {
            return Err(Error::InvalidArgument(format!(
                "invalid distance interval [{min}, {max})"
            )));
        }
        Ok(Interval { min, max })
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.min && d < self.max
    }
}

/// Split `t` by `|x_b - x_a|`. Every output keeps the same stored columns;
/// entries whose distance falls outside an interval are zero there.
pub fn band_decompose(t: &TransportMatrix, intervals: &[Interval]) -> Result<Vec<TransportMatrix>> {
    let mut sorted: Vec<Interval> = intervals.to_vec();
    sorted.sort_by(|a, b| a.min.total_cmp(&b.min));
    for w in sorted.windows(2) {
        if w[1].min < w[0].max {
            return Err(Error::InvalidArgument(format!(
                "intervals [{}, {}) and [{}, {}) overlap",
                w[0].min, w[0].max, w[1].min, w[1].max
            )));
        }
    }
    Ok(intervals
        .iter()
        .map(|iv| {
            let mut band = t.clone();
            for (&a, col) in band.columns.iter_mut() {
                for (b, v) in col.iter_mut().enumerate() {
                    if !iv.contains(t.grid.distance(a, b)) {
                        *v = 0.0;
                    }
                }
            }
            band
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn grid3() -> VoxelGrid {
        VoxelGrid::new(Vec3::new(0.0, 0.5, 0.0), [3, 1, 1], 0.1).unwrap()
    }

    #[test]
    fn outer_product_by_hand() {
        let m = OccupancyMask {
            grid: grid3(),
            bits: vec![true, false, true],
            epsilon: 0.0,
        };
        let dense = mask_outer(&m).to_dense();
        assert_eq!(
            dense,
            vec![
                vec![true, false, true],
                vec![false, false, false],
                vec![true, false, true]
            ]
        );
    }

    #[test]
    fn all_and_none() {
        for fill in [true, false] {
            let m = OccupancyMask {
                grid: grid3(),
                bits: vec![fill; 3],
                epsilon: 0.0,
            };
            let d = mask_outer(&m).to_dense();
            assert!(d.iter().flatten().all(|&x| x == fill));
        }
    }

    #[test]
    fn mask_idempotent() {
        let m = OccupancyMask {
            grid: grid3(),
            bits: vec![true, false, true],
            epsilon: 0.0,
        };
        let mm = mask_outer(&m);
        assert_eq!(mm.and(&mm), mm);
    }

    #[test]
    fn occupancy_thresholds() {
        let img = DirectImage {
            grid: grid3(),
            values: vec![0.0; 3],
        };
        assert!(occupancy_from_direct(&img, 0.0).unwrap().is_empty());
        let img = DirectImage {
            grid: grid3(),
            values: vec![1.0, 3.0, 2.0],
        };
        assert!(occupancy_from_direct(&img, 3.5).unwrap().is_empty());
        let m = occupancy_from_direct(&img, 1.0).unwrap();
        assert_eq!(m.bits, vec![false, true, true]);
        assert!(occupancy_from_direct(&img, -1.0).is_err());
        let eps = Threshold::Relative(0.5).resolve(&img).unwrap();
        assert_eq!(eps, 1.5);
    }

    fn full_matrix() -> TransportMatrix {
        let mut t = TransportMatrix::new(grid3(), MatrixKind::Gated2Bounce);
        t.insert_column(0, vec![1.0, 2.0, 3.0]).unwrap();
        t.insert_column(2, vec![0.5, 0.0, 4.0]).unwrap();
        t
    }

    #[test]
    fn single_unbounded_band_is_identity() {
        let t = full_matrix();
        let bands = band_decompose(&t, &[Interval::new(0.0, f64::INFINITY).unwrap()]).unwrap();
        assert_eq!(bands[0], t);
    }

    #[test]
    fn half_pitch_band_keeps_diagonal() {
        let t = full_matrix();
        let bands = band_decompose(&t, &[Interval::new(0.0, 0.05).unwrap()]).unwrap();
        let nz: Vec<_> = bands[0].nonzeros().collect();
        assert_eq!(nz, vec![(0, 0, 1.0), (2, 2, 4.0)]);
    }

    #[test]
    fn complementary_bands_sum_exactly() {
        let t = full_matrix();
        let bands = band_decompose(
            &t,
            &[Interval::new(0.0, 0.15).unwrap(), Interval::new(0.15, f64::INFINITY).unwrap()],
        )
        .unwrap();
        for (&a, col) in &t.columns {
            for (b, v) in col.iter().enumerate() {
                assert_eq!(bands[0].get(a, b) + bands[1].get(a, b), *v);
            }
        }
    }

    #[test]
    fn overlapping_bands_rejected() {
        let t = full_matrix();
        let err = band_decompose(
            &t,
            &[Interval::new(0.0, 0.2).unwrap(), Interval::new(0.1, 0.3).unwrap()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn negative_entries_rejected() {
        let mut t = TransportMatrix::new(grid3(), MatrixKind::Naive);
        assert!(t.insert_column(0, vec![1.0, -1.0, 0.0]).is_err());
        assert!(t.insert_column(0, vec![1.0, 0.0]).is_err());
    }
}
