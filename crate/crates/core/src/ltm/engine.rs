use rayon::prelude::*;

use super::{DirectImage, MatrixKind, OccupancyMask, TransportMatrix, VoxelGrid};
use crate::error::{Error, Result};
use crate::phasor::imaging::{focus_legs, FocusLeg};
use crate::phasor::{GateKind, GatedProjector, WaveParams};
use crate::sim::ImpulseResponse;

/// Probes the virtual transport matrix of one impulse response over one
/// voxel grid. Holds the sparse projector so repeated probes share it.
#[derive(Debug, Clone)]
pub struct LtmEngine<'a> {
    h: &'a ImpulseResponse,
    grid: VoxelGrid,
    params: WaveParams,
    projector: GatedProjector,
}

impl<'a> LtmEngine<'a> {
    pub fn new(h: &'a ImpulseResponse, grid: &VoxelGrid, params: &WaveParams) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        h.validate()?;
        for v in 0..grid.len() {
            if h.topology.height_above_wall(grid.center(v)) <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "voxel {v} is not in front of the relay wall"
                )));
            }
        }
        Ok(LtmEngine {
            h,
            grid: *grid,
            params: *params,
            projector: GatedProjector::new(h, params),
        })
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    fn laser_legs(&self, v: usize) -> Vec<FocusLeg> {
        focus_legs(&self.h.topology.laser_points, self.grid.center(v), &self.params)
            .expect("voxels in front of the wall are off the relay plane")
    }

    fn spad_legs(&self, v: usize) -> Vec<FocusLeg> {
        focus_legs(&self.h.topology.spad_points, self.grid.center(v), &self.params)
            .expect("voxels in front of the wall are off the relay plane")
    }

    /// Confocal probe of one voxel: illuminate and image `v`, gate at `t_d`.
    pub fn direct_value(&self, v: usize) -> f64 {
        self.projector.focus(
            &self.laser_legs(v),
            &self.spad_legs(v),
            0.0,
            GateKind::Gaussian,
        )
    }

    pub fn compute_direct(&self) -> DirectImage {
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|v| self.direct_value(v))
            .collect();
        DirectImage {
            grid: self.grid,
            values,
        }
    }

    fn check_voxel(&self, v: usize) -> Result<()> {
        if v >= self.grid.len() {
            return Err(Error::InvalidArgument(format!(
                "voxel index {v} outside a grid of {} voxels",
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Entries `T(a, b)` for the listed destinations `b`, in the given order.
    pub fn column_rows(&self, a: usize, rows: &[usize], kind: GateKind) -> Result<Vec<f64>> {
        self.check_voxel(a)?;
        for &b in rows {
            self.check_voxel(b)?;
        }
        let illum = self.laser_legs(a);
        let xa = self.grid.center(a);
        Ok(rows
            .par_iter()
            .map(|&b| {
                let middle = xa.distance(self.grid.center(b));
                self.projector.focus(&illum, &self.spad_legs(b), middle, kind)
            })
            .collect())
    }

    /// Full column `a`: illumination focused at `a`, imaged at every voxel.
    pub fn compute_column(&self, a: usize, kind: GateKind) -> Result<Vec<f64>> {
        let rows: Vec<usize> = (0..self.grid.len()).collect();
        self.column_rows(a, &rows, kind)
    }

    fn check_mask(&self, mask: &OccupancyMask) -> Result<()> {
        if mask.grid != self.grid || mask.bits.len() != self.grid.len() {
            return Err(Error::InvalidArgument(
                "occupancy mask was built for a different voxel grid".into(),
            ));
        }
        Ok(())
    }

    /// In-focus indirect light: `I_i(b) = sum_{a in Γ, a != b} T(a, b)` for
    /// occupied `b`, zero elsewhere. Sources are visited in ascending order.
    pub fn accumulate_in_focus_indirect(
        &self,
        mask: &OccupancyMask,
        kind: GateKind,
    ) -> Result<Vec<f64>> {
        self.check_mask(mask)?;
        let occupied: Vec<usize> = mask.occupied().collect();
        let mut out = vec![0.0; self.grid.len()];
        for &a in &occupied {
            let rows: Vec<usize> = occupied.iter().copied().filter(|&b| b != a).collect();
            let values = self.column_rows(a, &rows, kind)?;
            for (b, v) in rows.into_iter().zip(values) {
                out[b] += v;
            }
        }
        Ok(out)
    }

    /// Assemble the columns of `sources`. With a mask, unoccupied sources are
    /// skipped and unoccupied destinations stay exactly zero. Diagonal
    /// entries always come from the direct probe.
    pub fn assemble(
        &self,
        sources: &[usize],
        kind: GateKind,
        mask: Option<&OccupancyMask>,
    ) -> Result<TransportMatrix> {
        if sources.is_empty() {
            return Err(Error::InvalidArgument("no source voxels requested".into()));
        }
        for &a in sources {
            self.check_voxel(a)?;
        }
        if let Some(m) = mask {
            self.check_mask(m)?;
        }
        let matrix_kind = match (mask, kind) {
            (Some(_), _) => MatrixKind::Masked,
            (None, GateKind::Gaussian) => MatrixKind::Gated2Bounce,
            (None, GateKind::HigherOrderComplement) => MatrixKind::GatedHigher,
        };
        let mut t = TransportMatrix::new(self.grid, matrix_kind);
        let rows: Vec<usize> = match mask {
            Some(m) => m.occupied().collect(),
            None => (0..self.grid.len()).collect(),
        };
        let mut sorted = sources.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for a in sorted {
            if mask.is_some_and(|m| !m.bits[a]) {
                continue;
            }
            let mut column = vec![0.0; self.grid.len()];
            for (b, v) in rows.iter().zip(self.column_rows(a, &rows, kind)?) {
                column[*b] = v;
            }
            column[a] = self.direct_value(a);
            t.insert_column(a, column)?;
        }
        Ok(t)
    }
}

pub fn compute_direct(
    h: &ImpulseResponse,
    grid: &VoxelGrid,
    params: &WaveParams,
) -> Result<DirectImage> {
    Ok(LtmEngine::new(h, grid, params)?.compute_direct())
}

pub fn compute_column(
    h: &ImpulseResponse,
    grid: &VoxelGrid,
    params: &WaveParams,
    source: usize,
    gate_kind: GateKind,
) -> Result<Vec<f64>> {
    LtmEngine::new(h, grid, params)?.compute_column(source, gate_kind)
}

pub fn accumulate_in_focus_indirect(
    h: &ImpulseResponse,
    grid: &VoxelGrid,
    params: &WaveParams,
    mask: &OccupancyMask,
) -> Result<Vec<f64>> {
    LtmEngine::new(h, grid, params)?.accumulate_in_focus_indirect(mask, GateKind::Gaussian)
}

pub fn assemble_ltm(
    h: &ImpulseResponse,
    grid: &VoxelGrid,
    params: &WaveParams,
    sources: &[usize],
    gate_kind: GateKind,
    mask: Option<&OccupancyMask>,
) -> Result<TransportMatrix> {
    LtmEngine::new(h, grid, params)?.assemble(sources, gate_kind, mask)
}
