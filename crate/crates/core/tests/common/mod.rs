#![allow(dead_code)]

use nlos_ltm::ltm::VoxelGrid;
use nlos_ltm::phasor::WaveParams;
use nlos_ltm::sim::{
    simulate_impulse_response, ImpulseResponse, Patch, RelayTopology, SceneDescription, TimeAxis,
    WallGrid,
};
use nlos_ltm::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const WALL_NORMAL: Vec3 = Vec3::new(0.0, 1.0, 0.0);
pub const DOWN: Vec3 = Vec3::new(0.0, -1.0, 0.0);

/// 8 x 8 lasers and 8 x 8 SPADs over the same 1 x 1 m square.
pub fn desk_topology() -> RelayTopology {
    let g = WallGrid {
        center: Vec3::ZERO,
        size: [1.0, 1.0],
        counts: [8, 8],
    };
    RelayTopology::from_grids(&g, &g, WALL_NORMAL)
}

/// 16 x 8 x 16 voxels of 8 cm; depth (y) runs from 0.40 to 1.04 m.
pub fn desk_grid() -> VoxelGrid {
    VoxelGrid::new(Vec3::new(-0.64, 0.4, -0.64), [16, 8, 16], 0.08).unwrap()
}

/// Carrier at twice the 0.125 m laser spacing.
pub fn desk_params() -> WaveParams {
    WaveParams::new(0.25).unwrap()
}

pub fn desk_axis() -> TimeAxis {
    TimeAxis::new(85e-12, 512, 0.0).unwrap()
}

pub fn scene(patches: Vec<Patch>, max_bounces: usize) -> SceneDescription {
    SceneDescription {
        patches,
        relay: desk_topology(),
        time_axis: desk_axis(),
        max_bounces,
        noise: None,
    }
}

pub fn simulate(patches: Vec<Patch>, max_bounces: usize) -> ImpulseResponse {
    simulate_impulse_response(&scene(patches, max_bounces)).unwrap().0
}

/// Lambertian patch at a voxel center, facing the wall.
pub fn facing_wall(grid: &VoxelGrid, v: usize, area: f64) -> Patch {
    Patch::lambertian(grid.center(v), DOWN, area, 1.0)
}

/// Normal that points halfway between `toward` and the wall direction `wall`.
pub fn tilted(from: Vec3, toward: Vec3, wall: Vec3) -> Vec3 {
    ((toward - from).normalized() + (wall - from).normalized()).normalized()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
