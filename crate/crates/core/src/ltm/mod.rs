//! Assembly and probing of the virtual light transport matrix.
//!
//! The diagonal is the confocal direct-light image. Off-diagonal columns
//! focus illumination on a source voxel and image every destination with a
//! gate on the 4-vertex path time. Direct light doubles as an occupancy
//! oracle that restricts indirect probing to surfaces.

mod engine;
mod grid;
mod matrix;

pub use engine::{
    accumulate_in_focus_indirect, assemble_ltm, compute_column, compute_direct, LtmEngine,
};
pub use grid::VoxelGrid;
pub use matrix::{
    band_decompose, mask_outer, occupancy_from_direct, DirectImage, Interval, MaskMatrix,
    MatrixKind, OccupancyMask, Threshold, TransportMatrix,
};
