use rustfft::num_complex::Complex64;

use super::{thin_lens, GateKind, WaveParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sim::{RelayTopology, TimeAxis, SPEED_OF_LIGHT};

/// Complex time series sampled at bin centers for a set of relay points.
/// Values are stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasorSignal {
    pub points: Vec<Vec3>,
    pub time_axis: TimeAxis,
    pub values: Vec<Complex64>,
}

impl PhasorSignal {
    pub fn series(&self, point: usize) -> &[Complex64] {
        let n = self.time_axis.bin_count;
        &self.values[point * n..(point + 1) * n]
    }

    /// Bin with the largest magnitude for `point`.
    pub fn peak_bin(&self, point: usize) -> usize {
        self.series(point)
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, z)| {
                if z.norm() > best.1 {
                    (i, z.norm())
                } else {
                    best
                }
            })
            .0
    }
}

/// Travel time of a polyline given its segment lengths.
pub(crate) fn path_time(first: f64, middle: f64, last: f64) -> f64 {
    (first + middle + last) / SPEED_OF_LIGHT
}

/// Gated, focused emission profile on `time_axis`:
/// `gate(t) * e^{iωt} * e^{-ik r} / r` with `r = |x_focus - x_l|`.
fn focused_emission(
    x_l: Vec3,
    x_focus: Vec3,
    gate_center: f64,
    kind: GateKind,
    params: &WaveParams,
    time_axis: &TimeAxis,
) -> Result<PhasorSignal> {
    let r = x_focus.distance(x_l);
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "illumination focus coincides with the laser point".into(),
        ));
    }
    let amp = thin_lens(x_l, x_focus, params) / r;
    let gate = params.gate(gate_center, kind);
    let omega = params.omega();
    let values = (0..time_axis.bin_count)
        .map(|i| {
            let t = time_axis.center(i);
            let g = gate.eval(t);
            if g == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let wt = omega * t;
                Complex64::new(wt.cos(), wt.sin()) * amp * g
            }
        })
        .collect();
    Ok(PhasorSignal {
        points: vec![x_l],
        time_axis: *time_axis,
        values,
    })
}

/// Illumination that focuses on `x_v` and gates the 3-vertex path
/// `<x_l, x_v, x_s>`.
pub fn make_direct_illumination(
    x_l: Vec3,
    x_v: Vec3,
    x_s: Vec3,
    params: &WaveParams,
    time_axis: &TimeAxis,
) -> Result<PhasorSignal> {
    let t_d = path_time(x_l.distance(x_v), 0.0, x_s.distance(x_v));
    focused_emission(x_l, x_v, t_d, GateKind::Gaussian, params, time_axis)
}

/// Illumination that focuses on `x_a` and gates the 4-vertex path
/// `<x_l, x_a, x_b, x_s>` (or everything after it, for the complement gate).
pub fn make_indirect_illumination(
    x_l: Vec3,
    x_a: Vec3,
    x_b: Vec3,
    x_s: Vec3,
    params: &WaveParams,
    time_axis: &TimeAxis,
    gate_kind: GateKind,
) -> Result<PhasorSignal> {
    let t_i4 = path_time(x_l.distance(x_a), x_a.distance(x_b), x_s.distance(x_b));
    focused_emission(x_l, x_a, t_i4, gate_kind, params, time_axis)
}

/// A family of emission profiles, one per laser point or one per
/// (laser, SPAD) pair when the gate depends on the SPAD position.
#[derive(Debug, Clone, PartialEq)]
pub enum Illumination {
    PerLaser(PhasorSignal),
    PerPair {
        time_axis: TimeAxis,
        spad_count: usize,
        values: Vec<Complex64>,
    },
}

impl Illumination {
    /// Direct-light probe of voxel `x_v` for every pair of `topology`.
    pub fn direct(
        topology: &RelayTopology,
        x_v: Vec3,
        params: &WaveParams,
        time_axis: &TimeAxis,
    ) -> Result<Self> {
        Self::per_pair(topology, time_axis, |xl, xs| {
            make_direct_illumination(xl, x_v, xs, params, time_axis)
        })
    }

    /// Indirect probe: light focused on `x_a`, gated for arrival at `x_b`.
    pub fn indirect(
        topology: &RelayTopology,
        x_a: Vec3,
        x_b: Vec3,
        params: &WaveParams,
        time_axis: &TimeAxis,
        gate_kind: GateKind,
    ) -> Result<Self> {
        Self::per_pair(topology, time_axis, |xl, xs| {
            make_indirect_illumination(xl, x_a, x_b, xs, params, time_axis, gate_kind)
        })
    }

    fn per_pair(
        topology: &RelayTopology,
        time_axis: &TimeAxis,
        mut build: impl FnMut(Vec3, Vec3) -> Result<PhasorSignal>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(
            topology.laser_count() * topology.spad_count() * time_axis.bin_count,
        );
        for &xl in &topology.laser_points {
            for &xs in &topology.spad_points {
                values.extend(build(xl, xs)?.values);
            }
        }
        Ok(Illumination::PerPair {
            time_axis: *time_axis,
            spad_count: topology.spad_count(),
            values,
        })
    }

    pub fn time_axis(&self) -> &TimeAxis {
        match self {
            Illumination::PerLaser(s) => &s.time_axis,
            Illumination::PerPair { time_axis, .. } => time_axis,
        }
    }

    /// Emission profile used for the pair `(laser, spad)`.
    pub fn series(&self, laser: usize, spad: usize) -> &[Complex64] {
        match self {
            Illumination::PerLaser(s) => s.series(laser),
            Illumination::PerPair {
                time_axis,
                spad_count,
                values,
            } => {
                let n = time_axis.bin_count;
                let start = (laser * spad_count + spad) * n;
                &values[start..start + n]
            }
        }
    }

    /// Multiply every sample by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        let values = match &mut out {
            Illumination::PerLaser(s) => &mut s.values,
            Illumination::PerPair { values, .. } => values,
        };
        for v in values.iter_mut() {
            *v *= factor;
        }
        out
    }
}
