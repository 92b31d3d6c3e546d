//! JSON scene files and run configurations.
//!
//! Both reject unknown keys. Errors name the offending key path, e.g.
//! `wave.wavelength: must be positive`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ltm::{Interval, Threshold, VoxelGrid};
use crate::phasor::{GateKind, WaveParams};
use crate::sim::{
    NoiseSpec, Patch, RelayTopology, SceneDescription, TimeAxis, WallGrid, DEFAULT_BIN_WIDTH,
};

fn parse_json<T: DeserializeOwned>(text: &str, what: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let key = if path == "." { String::new() } else { format!("{path}: ") };
        Error::Config(format!("{}: {key}{inner}", what.display()))
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

/// Laser or SPAD positions: either a regular grid or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSet {
    Grid(WallGrid),
    Points(Vec<Vec3>),
}

impl Default for PointSet {
    fn default() -> Self {
        PointSet::Grid(WallGrid {
            center: Vec3::ZERO,
            size: [2.0, 2.0],
            counts: [32, 32],
        })
    }
}

impl PointSet {
    fn resolve(&self, normal: Vec3) -> Vec<Vec3> {
        match self {
            PointSet::Grid(g) => g.points(normal),
            PointSet::Points(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaySpec {
    #[serde(default = "default_normal")]
    pub wall_normal: Vec3,
    #[serde(default)]
    pub laser: PointSet,
    #[serde(default)]
    pub spad: PointSet,
}

fn default_normal() -> Vec3 {
    Vec3::new(0.0, 1.0, 0.0)
}

impl Default for RelaySpec {
    fn default() -> Self {
        RelaySpec {
            wall_normal: default_normal(),
            laser: PointSet::default(),
            spad: PointSet::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default = "default_bin_count")]
    pub bin_count: usize,
    #[serde(default)]
    pub origin: f64,
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

fn default_bin_count() -> usize {
    512
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            bin_width: default_bin_width(),
            bin_count: default_bin_count(),
            origin: 0.0,
        }
    }
}

/// On-disk scene description.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default)]
    pub patches: Vec<Patch>,
    #[serde(default)]
    pub relay: RelaySpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default = "default_bounces")]
    pub max_bounces: usize,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
}

fn default_bounces() -> usize {
    3
}

impl SceneFile {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        parse_json(text, origin)
    }

    /// Build a validated scene. Patch normals are normalized first.
    pub fn to_scene(&self) -> Result<SceneDescription> {
        let n = self.relay.wall_normal;
        if !(n.is_finite() && n.norm() > 0.0) {
            return Err(bad("relay.wall_normal", "must be a finite nonzero vector"));
        }
        let n = n.normalized();
        let mut patches = self.patches.clone();
        for (i, p) in patches.iter_mut().enumerate() {
            if !(p.normal.is_finite() && p.normal.norm() > 0.0) {
                return Err(bad(&format!("patches[{i}].normal"), "must be a finite nonzero vector"));
            }
            p.normal = p.normal.normalized();
        }
        let time_axis = TimeAxis::new(self.time.bin_width, self.time.bin_count, self.time.origin)
            .map_err(|e| bad("time", e))?;
        let scene = SceneDescription {
            patches,
            relay: RelayTopology {
                laser_points: self.relay.laser.resolve(n),
                spad_points: self.relay.spad.resolve(n),
                wall_normal: n,
            },
            time_axis,
            max_bounces: self.max_bounces,
            noise: self.noise,
        };
        scene.validate()?;
        Ok(scene)
    }
}

pub fn load_scene(path: &Path) -> Result<SceneDescription> {
    SceneFile::from_json(&read_text(path)?, path)?.to_scene()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    /// Defaults to four times the laser spacing.
    pub wavelength: Option<f64>,
    pub gate_sigma: Option<f64>,
    #[serde(default)]
    pub gate_delay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec3,
    pub counts: [usize; 3],
    pub pitch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsilonSpec {
    Relative(f64),
    Absolute(f64),
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        match Threshold::default() {
            Threshold::Relative(r) => EpsilonSpec::Relative(r),
            Threshold::Absolute(a) => EpsilonSpec::Absolute(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Sources {
    Keyword(String),
    List(Vec<usize>),
}

impl Default for Sources {
    fn default() -> Self {
        Sources::Keyword("all".into())
    }
}

/// Settings shared by every pipeline stage. Relative paths are resolved
/// against the directory of the configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub impulse: PathBuf,
    pub scene: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub wave: WaveSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
    /// Distance intervals `[min, max]`; a `null` max means unbounded.
    #[serde(default)]
    pub bands: Vec<(f64, Option<f64>)>,
    #[serde(default = "default_gate")]
    pub gate: GateKind,
    #[serde(default)]
    pub sources: Sources,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "default_axis")]
    pub projection_axis: usize,
}

fn default_gate() -> GateKind {
    GateKind::Gaussian
}

fn default_threads() -> usize {
    1
}

fn default_axis() -> usize {
    1
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg: RunConfig = parse_json(text, origin)?;
        if let Some(dir) = origin.parent() {
            for p in [&mut cfg.impulse, &mut cfg.output_dir] {
                *p = dir.join(&*p);
            }
            if let Some(s) = cfg.scene.as_mut() {
                *s = dir.join(&*s);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.wave;
        if let Some(l) = w.wavelength {
            if !(l > 0.0 && l.is_finite()) {
                return Err(bad("wave.wavelength", format!("must be positive, got {l}")));
            }
        }
        if let Some(s) = w.gate_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(bad("wave.gate_sigma", format!("must be positive, got {s}")));
            }
        }
        if !w.gate_delay.is_finite() {
            return Err(bad("wave.gate_delay", "must be finite"));
        }
        self.voxel_grid()?;
        self.threshold()?;
        self.intervals()?;
        self.source_list()?;
        if self.threads == 0 {
            return Err(bad("threads", "must be at least 1"));
        }
        if self.projection_axis > 2 {
            return Err(bad("projection_axis", format!("must be 0, 1 or 2, got {}", self.projection_axis)));
        }
        Ok(())
    }

    pub fn voxel_grid(&self) -> Result<VoxelGrid> {
        let g = &self.grid;
        if !(g.pitch > 0.0 && g.pitch.is_finite()) {
            return Err(bad("grid.pitch", format!("must be positive, got {}", g.pitch)));
        }
        if g.counts.contains(&0) {
            return Err(bad("grid.counts", "every count must be at least 1"));
        }
        if !g.origin.is_finite() {
            return Err(bad("grid.origin", "must be finite"));
        }
        VoxelGrid::new(g.origin, g.counts, g.pitch).map_err(|e| bad("grid", e))
    }

    pub fn threshold(&self) -> Result<Threshold> {
        match self.epsilon {
            EpsilonSpec::Relative(r) if r > 0.0 && r <= 1.0 => Ok(Threshold::Relative(r)),
            EpsilonSpec::Relative(r) => Err(bad("epsilon.relative", format!("must be in (0, 1], got {r}"))),
            EpsilonSpec::Absolute(a) if a >= 0.0 && a.is_finite() => Ok(Threshold::Absolute(a)),
            EpsilonSpec::Absolute(a) => Err(bad("epsilon.absolute", format!("must be >= 0, got {a}"))),
        }
    }

    pub fn intervals(&self) -> Result<Vec<Interval>> {
        self.bands
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| {
                Interval::new(lo, hi.unwrap_or(f64::INFINITY)).map_err(|e| bad(&format!("bands[{i}]"), e))
            })
            .collect()
    }

    /// Requested source voxels, or `None` for all of them.
    pub fn source_list(&self) -> Result<Option<Vec<usize>>> {
        match &self.sources {
            Sources::Keyword(k) if k == "all" => Ok(None),
            Sources::Keyword(k) => Err(bad("sources", format!("expected \"all\" or a list of voxel indices, got {k:?}"))),
            Sources::List(list) => {
                let n = self.grid.counts.iter().product::<usize>();
                if list.is_empty() {
                    return Err(bad("sources", "list is empty"));
                }
                if let Some((i, a)) = list.iter().enumerate().find(|(_, &a)| a >= n) {
                    return Err(bad(&format!("sources[{i}]"), format!("voxel {a} is outside a grid of {n}")));
                }
                Ok(Some(list.clone()))
            }
        }
    }

    /// Carrier parameters, defaulting the wavelength from the capture.
    pub fn wave_params(&self, topology: &RelayTopology) -> Result<WaveParams> {
        let mut p = match self.wave.wavelength {
            Some(l) => WaveParams::new(l)?,
            None => WaveParams::for_topology(topology).map_err(|e| bad("wave.wavelength", e))?,
        };
        if let Some(s) = self.wave.gate_sigma {
            p = p.with_gate_sigma(s)?;
        }
        Ok(p.with_gate_delay(self.wave.gate_delay))
    }
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    RunConfig::from_json(&read_text(path)?, path)
}
