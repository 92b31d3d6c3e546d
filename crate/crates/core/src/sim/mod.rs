//! Transient path-sum simulator for small analytic hidden scenes.
//!
//! The hidden scene is a handful of point-like planar patches. Every ordered
//! patch sequence up to `max_bounces` long is enumerated for each
//! (laser point, SPAD point) pair on the relay wall, and its throughput is
//! deposited into the time bin of its total path length. Time zero is the
//! instant light leaves the laser spot on the wall; the laser-to-wall and
//! wall-to-sensor legs of a physical setup are not modeled.

mod brdf;
mod noise;
mod simulate;

pub use brdf::{brdf_eval, Material};
pub use noise::{apply_noise, NoiseSpec};
pub use simulate::{simulate_impulse_response, SimReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Temporal resolution of the reference SPAD/TCSPC capture system (85 ps).
pub const DEFAULT_BIN_WIDTH: f64 = 85e-12;

const UNIT_TOLERANCE: f64 = 1e-9;
const COPLANAR_TOLERANCE: f64 = 1e-9;

/// Uniform histogram time axis. Bin `i` covers
/// `[origin + i*bin_width, origin + (i+1)*bin_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub bin_width: f64,
    pub bin_count: usize,
    pub origin: f64,
}

impl TimeAxis {
    pub fn new(bin_width: f64, bin_count: usize, origin: f64) -> Result<Self> {
        let axis = TimeAxis {
            bin_width,
            bin_count,
            origin,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time axis bin_width must be positive, got {}",
                self.bin_width
            )));
        }
        if self.bin_count == 0 {
            return Err(Error::InvalidArgument(
                "time axis bin_count must be at least 1".into(),
            ));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidArgument("time axis origin is not finite".into()));
        }
        Ok(())
    }

    /// Index of the bin containing time `t`, if it lies on the axis.
    pub fn bin_of(&self, t: f64) -> Option<usize> {
        let x = ((t - self.origin) / self.bin_width).floor();
        if x >= 0.0 && x < self.bin_count as f64 {
            Some(x as usize)
        } else {
            None
        }
    }

    /// Representative (center) time of bin `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.bin_width
    }

    pub fn end(&self) -> f64 {
        self.origin + self.bin_count as f64 * self.bin_width
    }
}

/// A rectangular grid of points on the relay wall, sampled at cell centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallGrid {
    pub center: Vec3,
    /// Extent along the wall's horizontal and vertical in-plane axes, meters.
    pub size: [f64; 2],
    pub counts: [usize; 2],
}

impl WallGrid {
    /// Cell-centered sample positions, vertical index outer, horizontal inner.
    pub fn points(&self, wall_normal: Vec3) -> Vec<Vec3> {
        let (u, v) = wall_axes(wall_normal);
        let [nu, nv] = self.counts;
        let du = self.size[0] / nu as f64;
        let dv = self.size[1] / nv as f64;
        let mut pts = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            let ov = (j as f64 + 0.5) * dv - 0.5 * self.size[1];
            for i in 0..nu {
                let ou = (i as f64 + 0.5) * du - 0.5 * self.size[0];
                pts.push(self.center + u * ou + v * ov);
            }
        }
        pts
    }
}

/// In-plane axes `(u, v)` of a wall with the given normal. `u` is world X
/// projected onto the plane (world Z if the normal is along X) and
/// `v = u × n`, so a wall facing +Y gets `u = +X`, `v = +Z`.
pub fn wall_axes(normal: Vec3) -> (Vec3, Vec3) {
    let n = normal.normalized();
    let mut seed = Vec3::new(1.0, 0.0, 0.0);
    if n.dot(seed).abs() > 0.9 {
        seed = Vec3::new(0.0, 0.0, 1.0);
    }
    let u = (seed - n * n.dot(seed)).normalized();
    let v = u.cross(n);
    (u, v)
}

/// Laser and SPAD sample positions on the relay wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayTopology {
    pub laser_points: Vec<Vec3>,
    pub spad_points: Vec<Vec3>,
    pub wall_normal: Vec3,
}

impl RelayTopology {
    pub fn from_grids(laser: &WallGrid, spad: &WallGrid, wall_normal: Vec3) -> Self {
        RelayTopology {
            laser_points: laser.points(wall_normal),
            spad_points: spad.points(wall_normal),
            wall_normal,
        }
    }

    pub fn laser_count(&self) -> usize {
        self.laser_points.len()
    }

    pub fn spad_count(&self) -> usize {
        self.spad_points.len()
    }

    /// A point on the wall plane.
    pub fn wall_point(&self) -> Vec3 {
        self.laser_points.first().copied().unwrap_or(Vec3::ZERO)
    }

    /// Signed distance of `p` from the wall plane along its normal.
    pub fn height_above_wall(&self, p: Vec3) -> f64 {
        (p - self.wall_point()).dot(self.wall_normal)
    }

    pub fn validate(&self) -> Result<()> {
        if self.laser_points.is_empty() || self.spad_points.is_empty() {
            return Err(Error::InvalidArgument(
                "relay topology needs at least one laser and one SPAD point".into(),
            ));
        }
        if (self.wall_normal.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "wall normal must be unit length, |n| = {}",
                self.wall_normal.norm()
            )));
        }
        for (kind, pts) in [("laser", &self.laser_points), ("SPAD", &self.spad_points)] {
            for (i, p) in pts.iter().enumerate() {
                if !p.is_finite() {
                    return Err(Error::InvalidArgument(format!("{kind} point {i} is not finite")));
                }
                let h = self.height_above_wall(*p);
                if h.abs() > COPLANAR_TOLERANCE {
                    return Err(Error::InvalidArgument(format!(
                        "{kind} point {i} is {h:e} m off the relay wall plane"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mean nearest-neighbor spacing of the laser grid; `None` for a single point.
    pub fn laser_spacing(&self) -> Option<f64> {
        mean_nearest_neighbor(&self.laser_points)
    }

    /// Quadrature weight of one laser sample (spacing squared, 1 for a single point).
    pub fn laser_cell_area(&self) -> f64 {
        self.laser_spacing().map_or(1.0, |d| d * d)
    }

    pub fn spad_cell_area(&self) -> f64 {
        mean_nearest_neighbor(&self.spad_points).map_or(1.0, |d| d * d)
    }
}

fn mean_nearest_neighbor(points: &[Vec3]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let total: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| p.distance(*q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Some(total / points.len() as f64)
}

/// Round a sample to the binary32 precision used on disk, so simulated
/// responses survive a file round trip unchanged.
pub fn storage_precision(v: f64) -> f64 {
    v as f32 as f64
}

/// Time-resolved impulse response `H(x_l, x_s, t)` on the relay wall.
///
/// Samples are stored laser-major, then SPAD, then time, as relative flux
/// per bin. Files keep them as binary32; see [`storage_precision`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub topology: RelayTopology,
    pub time_axis: TimeAxis,
    pub data: Vec<f64>,
}

impl ImpulseResponse {
    pub fn zeros(topology: RelayTopology, time_axis: TimeAxis) -> Self {
        let n = topology.laser_count() * topology.spad_count() * time_axis.bin_count;
        ImpulseResponse {
            topology,
            time_axis,
            data: vec![0.0; n],
        }
    }

    pub fn new(topology: RelayTopology, time_axis: TimeAxis, data: Vec<f64>) -> Result<Self> {
        let h = ImpulseResponse {
            topology,
            time_axis,
            data,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.time_axis.validate()?;
        let expected =
            self.topology.laser_count() * self.topology.spad_count() * self.time_axis.bin_count;
        if self.data.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "impulse response has {} samples, topology and time axis need {expected}",
                self.data.len()
            )));
        }
        if let Some(i) = self.data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "impulse response sample {i} is negative or non-finite ({})",
                self.data[i]
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.time_axis.bin_count
    }

    pub fn pair_index(&self, laser: usize, spad: usize) -> usize {
        laser * self.topology.spad_count() + spad
    }

    /// Histogram for one (laser, SPAD) pair.
    pub fn trace(&self, laser: usize, spad: usize) -> &[f64] {
        let n = self.bins();
        let start = self.pair_index(laser, spad) * n;
        &self.data[start..start + n]
    }

    /// Copy of this response with every sample multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        ImpulseResponse {
            topology: self.topology.clone(),
            time_axis: self.time_axis,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Copy delayed by `bins` samples (zeros shifted in, the tail dropped).
    pub fn delayed(&self, bins: usize) -> Self {
        let n = self.bins();
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.data.chunks_exact(n).zip(data.chunks_exact_mut(n)) {
            if bins < n {
                dst[bins..].copy_from_slice(&src[..n - bins]);
            }
        }
        ImpulseResponse {
            topology: self.topology.clone(),
            time_axis: self.time_axis,
            data,
        }
    }
}

/// A small planar surface element treated as a point scatterer with an
/// area weight. Occlusion uses a disk of the same area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Patch {
    pub center: Vec3,
    pub normal: Vec3,
    pub area: f64,
    pub albedo: f64,
    #[serde(default)]
    pub material: Material,
}

impl Patch {
    pub fn lambertian(center: Vec3, normal: Vec3, area: f64, albedo: f64) -> Self {
        Patch {
            center,
            normal: normal.normalized(),
            area,
            albedo,
            material: Material::Lambertian,
        }
    }

    pub fn with_material(mut self, material: Material) -> Self {
        self.material = material;
        self
    }

    pub fn disk_radius(&self) -> f64 {
        (self.area / std::f64::consts::PI).sqrt()
    }

    pub fn brdf(&self, incoming: Vec3, outgoing: Vec3) -> f64 {
        brdf_eval(self.material, self.albedo, incoming, outgoing, self.normal)
    }

    fn validate(&self, i: usize) -> Result<()> {
        if !self.center.is_finite() || !self.normal.is_finite() {
            return Err(Error::InvalidScene(format!("patch {i} has non-finite geometry")));
        }
        if (self.normal.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidScene(format!(
                "patch {i} normal must be unit length, |n| = {}",
                self.normal.norm()
            )));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::InvalidScene(format!("patch {i} area must be positive")));
        }
        if !(0.0..=1.0).contains(&self.albedo) {
            return Err(Error::InvalidScene(format!(
                "patch {i} albedo {} outside [0, 1]",
                self.albedo
            )));
        }
        if let Material::Phong { exponent } = self.material {
            if !(exponent >= 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidScene(format!(
                    "patch {i} Phong exponent must be >= 0, got {exponent}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything needed to simulate one impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub patches: Vec<Patch>,
    pub relay: RelayTopology,
    pub time_axis: TimeAxis,
    pub max_bounces: usize,
    pub noise: Option<NoiseSpec>,
}

impl SceneDescription {
    pub fn validate(&self) -> Result<()> {
        self.relay
            .validate()
            .map_err(|e| Error::InvalidScene(e.to_string()))?;
        self.time_axis
            .validate()
            .map_err(|e| Error::InvalidScene(e.to_string()))?;
        if self.max_bounces < 1 {
            return Err(Error::InvalidScene("max_bounces must be at least 1".into()));
        }
        for (i, p) in self.patches.iter().enumerate() {
            p.validate(i)?;
            if self.relay.height_above_wall(p.center) <= 0.0 {
                return Err(Error::InvalidScene(format!(
                    "patch {i} at {:?} is not in front of the relay wall",
                    p.center.to_array()
                )));
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }
}
