//! The imaging operator: gated illumination correlated against the impulse
//! response, summed over the relay apertures through thin lenses.
//!
//! For a pair `(x_l, x_s)` the emitted profile `P(t)` is time-reversed and
//! convolved with `H(x_l, x_s, t)`; the sample at lag `t` of that
//! convolution is `sum_j H(t_j) P(t_j - t)`. At lag zero the gate of `P`
//! lines up with the path times it was built for, and the carrier phase
//! `e^{iωt}` cancels the thin-lens phases of a path that really passes
//! through the focus points.

use rustfft::num_complex::Complex64;

use super::{convolve_time, thin_lens, GateKind, Illumination, WaveParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sim::{ImpulseResponse, SPEED_OF_LIGHT};

/// Image intensity at `x_focus` for the given illumination family.
///
/// `eval_time` is the lag of the illumination relative to the measured
/// signal; 0 is the retarded-time frame in which every gate sits on the
/// path time it selects. Non-integer lags interpolate linearly between
/// neighboring convolution samples.
pub fn image_value(
    h: &ImpulseResponse,
    illumination: &Illumination,
    x_focus: Vec3,
    params: &WaveParams,
    eval_time: f64,
) -> Result<f64> {
    let axis = illumination.time_axis();
    if axis.bin_width != h.time_axis.bin_width || axis.bin_count != h.time_axis.bin_count {
        return Err(Error::InvalidArgument(
            "illumination and impulse response use different time axes".into(),
        ));
    }
    if let Illumination::PerLaser(sig) = illumination {
        if sig.points.len() != h.topology.laser_count() {
            return Err(Error::InvalidArgument(format!(
                "illumination has {} laser points, impulse response has {}",
                sig.points.len(),
                h.topology.laser_count()
            )));
        }
    }
    let n = h.bins();
    let pos = (n - 1) as f64 + eval_time / axis.bin_width;
    let last = (2 * n - 2) as f64;
    if !(pos >= 0.0 && pos <= last) {
        return Err(Error::InvalidArgument(format!(
            "eval_time {eval_time:e} s lies outside the convolved time axis"
        )));
    }
    let k0 = pos.floor() as usize;
    let frac = pos - k0 as f64;

    let weight = h.topology.laser_cell_area() * h.topology.spad_cell_area();
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, &xs) in h.topology.spad_points.iter().enumerate() {
        let r = x_focus.distance(xs);
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("focus point lies on a SPAD point".into()));
        }
        let lens = thin_lens(xs, x_focus, params) / r;
        for l in 0..h.topology.laser_count() {
            let reversed: Vec<Complex64> =
                illumination.series(l, s).iter().rev().copied().collect();
            let trace: Vec<Complex64> = h
                .trace(l, s)
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            let conv = convolve_time(&reversed, &trace)?;
            let mut sample = conv[k0];
            if frac > 0.0 {
                sample = sample * (1.0 - frac) + conv[k0 + 1] * frac;
            }
            acc += sample * lens;
        }
    }
    Ok((acc * weight).norm_sqr())
}

/// Distance and focusing factor `e^{-ikr}/r` from each relay point to a focus.
#[derive(Debug, Clone, Copy)]
pub struct FocusLeg {
    pub distance: f64,
    pub lens: Complex64,
}

pub fn focus_legs(points: &[Vec3], focus: Vec3, params: &WaveParams) -> Result<Vec<FocusLeg>> {
    points
        .iter()
        .map(|&p| {
            let distance = focus.distance(p);
            if !(distance > 0.0) {
                return Err(Error::InvalidArgument("focus point lies on the relay wall".into()));
            }
            Ok(FocusLeg {
                distance,
                lens: thin_lens(p, focus, params) / distance,
            })
        })
        .collect()
}

/// Sparse, precomputed form of the imaging operator at lag zero.
///
/// Equivalent to [`image_value`] with per-pair gated illumination and
/// `eval_time = 0`, but only visits nonzero histogram bins near each gate,
/// so a whole voxel grid can be probed without per-voxel convolutions.
#[derive(Debug, Clone)]
pub struct GatedProjector {
    spad_count: usize,
    sigma: f64,
    delay: f64,
    weight: f64,
    /// `offsets[p]..offsets[p + 1]` indexes the samples of pair `p`.
    offsets: Vec<usize>,
    times: Vec<f64>,
    /// `H(t_j) e^{iω t_j}` for each nonzero sample.
    phasors: Vec<Complex64>,
}

/// Gaussian gate weights beyond this many σ are below 3e-18 and skipped.
const GATE_REACH: f64 = 9.0;
const LINEAR_SCAN_MAX: usize = 12;

impl GatedProjector {
    pub fn new(h: &ImpulseResponse, params: &WaveParams) -> Self {
        let n = h.bins();
        let omega = params.omega();
        let carrier: Vec<Complex64> = (0..n)
            .map(|i| {
                let wt = omega * h.time_axis.center(i);
                Complex64::new(wt.cos(), wt.sin())
            })
            .collect();
        let mut offsets = Vec::with_capacity(h.data.len() / n.max(1) + 1);
        let mut times = Vec::new();
        let mut phasors = Vec::new();
        offsets.push(0);
        for trace in h.data.chunks_exact(n) {
            for (i, &v) in trace.iter().enumerate() {
                if v != 0.0 {
                    times.push(h.time_axis.center(i));
                    phasors.push(carrier[i] * v);
                }
            }
            offsets.push(times.len());
        }
        GatedProjector {
            spad_count: h.topology.spad_count(),
            sigma: params.gate_sigma,
            delay: params.gate_delay,
            weight: h.topology.laser_cell_area() * h.topology.spad_cell_area(),
            offsets,
            times,
            phasors,
        }
    }

    pub fn nonzero_samples(&self) -> usize {
        self.times.len()
    }

    /// `sum_j H(t_j) e^{iω t_j} gate(t_j)` for one pair, gate centered at
    /// `path_time` plus the configured delay.
    pub fn project(&self, pair: usize, path_time: f64, kind: GateKind) -> Complex64 {
        let (start, end) = (self.offsets[pair], self.offsets[pair + 1]);
        if start == end {
            return Complex64::new(0.0, 0.0);
        }
        let times = &self.times[start..end];
        let phasors = &self.phasors[start..end];
        let center = path_time + self.delay;
        let inv_sigma = 1.0 / self.sigma;
        let mut acc = Complex64::new(0.0, 0.0);
        match kind {
            GateKind::Gaussian => {
                let lo_t = center - GATE_REACH * self.sigma;
                let hi_t = center + GATE_REACH * self.sigma;
                let (lo, hi) = if times.len() <= LINEAR_SCAN_MAX {
                    (0, times.len())
                } else {
                    (
                        times.partition_point(|&t| t < lo_t),
                        times.partition_point(|&t| t <= hi_t),
                    )
                };
                for j in lo..hi {
                    let t = times[j];
                    if t < lo_t || t > hi_t {
                        continue;
                    }
                    let d = (t - center) * inv_sigma;
                    acc += phasors[j] * (-0.5 * d * d).exp();
                }
            }
            GateKind::HigherOrderComplement => {
                let lo = times.partition_point(|&t| t <= center);
                for j in lo..times.len() {
                    let d = (times[j] - center) * inv_sigma;
                    acc += phasors[j] * (1.0 - (-0.5 * d * d).exp());
                }
            }
        }
        acc
    }

    /// Image intensity for illumination focused through `illum` legs and
    /// imaging through `image` legs. The gate of pair `(l, s)` is centered at
    /// `(d_l + middle + d_s) / c`: `middle = 0` probes direct light, and
    /// `middle = |x_b - x_a|` probes the 4-vertex path through `x_a` and `x_b`.
    pub fn focus(
        &self,
        illum: &[FocusLeg],
        image: &[FocusLeg],
        middle: f64,
        kind: GateKind,
    ) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, il) in illum.iter().enumerate() {
            let base = l * self.spad_count;
            let mut row = Complex64::new(0.0, 0.0);
            for (s, im) in image.iter().enumerate() {
                let t = (il.distance + middle + im.distance) / SPEED_OF_LIGHT;
                let g = self.project(base + s, t, kind);
                if g.re != 0.0 || g.im != 0.0 {
                    row += g * im.lens;
                }
            }
            acc += row * il.lens;
        }
        (acc * self.weight).norm_sqr()
    }
}
