//! Virtual wave machinery: monochromatic phasor signals, thin-lens
//! propagators, temporal gates, convolution and the imaging operator.

mod convolve;
pub(crate) mod imaging;
mod signal;

pub use convolve::{convolve_time, convolve_time_real};
pub use imaging::{image_value, GatedProjector};
pub use signal::{make_direct_illumination, make_indirect_illumination, Illumination, PhasorSignal};

use std::f64::consts::PI;

pub use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::sim::{RelayTopology, SPEED_OF_LIGHT};

/// Half-width, in standard deviations, of the central 99% of a Gaussian.
pub const GAUSSIAN_99_HALF_WIDTH: f64 = 2.576;

/// Virtual wavelength and gate width of the phasor-field carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    /// Virtual wavelength λ in meters.
    pub wavelength: f64,
    /// Standard deviation σ of the temporal gate, seconds.
    pub gate_sigma: f64,
    /// Constant offset added to every gate center, seconds. Models a fixed
    /// system delay between the simulated path time and the histogram axis.
    pub gate_delay: f64,
}

impl WaveParams {
    /// Wavelength `λ` with the default gate: ±2.576σ spans `4λ/c`.
    pub fn new(wavelength: f64) -> Result<Self> {
        let p = WaveParams {
            wavelength,
            gate_sigma: default_gate_sigma(wavelength),
            gate_delay: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default carrier for a capture: `λ` is four times the laser spacing.
    pub fn for_topology(topology: &RelayTopology) -> Result<Self> {
        let spacing = topology.laser_spacing().ok_or_else(|| {
            Error::InvalidArgument(
                "cannot infer a wavelength from a single laser point; set it explicitly".into(),
            )
        })?;
        WaveParams::new(4.0 * spacing)
    }

    pub fn with_gate_sigma(mut self, sigma: f64) -> Result<Self> {
        self.gate_sigma = sigma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gate_delay(mut self, delay: f64) -> Self {
        self.gate_delay = delay;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if !(self.gate_sigma > 0.0 && self.gate_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gate sigma must be positive, got {}",
                self.gate_sigma
            )));
        }
        if !self.gate_delay.is_finite() {
            return Err(Error::InvalidArgument("gate delay is not finite".into()));
        }
        Ok(())
    }

    /// Angular carrier frequency ω = 2πc/λ.
    pub fn omega(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Wavenumber k = ω/c = 2π/λ.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn gate(&self, center: f64, kind: GateKind) -> GateSpec {
        GateSpec {
            center: center + self.gate_delay,
            sigma: self.gate_sigma,
            kind,
        }
    }
}

pub fn default_gate_sigma(wavelength: f64) -> f64 {
    2.0 * wavelength / (GAUSSIAN_99_HALF_WIDTH * SPEED_OF_LIGHT)
}

/// Shape of the temporal gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    /// Unit-amplitude Gaussian around the gate center.
    #[serde(rename = "two-bounce", alias = "gaussian")]
    Gaussian,
    /// Zero up to the center, `1 - G` after it: keeps longer paths.
    #[serde(rename = "higher", alias = "higher-order")]
    HigherOrderComplement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub center: f64,
    pub sigma: f64,
    pub kind: GateKind,
}

impl GateSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            GateKind::Gaussian => gaussian_gate(self, t),
            GateKind::HigherOrderComplement => higher_order_gate(self.center, self, t),
        }
    }
}

/// `exp(-(t - t')^2 / 2σ^2)`, the Gaussian gate centered at `spec.center`.
pub fn gaussian_gate(spec: &GateSpec, t: f64) -> f64 {
    let d = (t - spec.center) / spec.sigma;
    (-0.5 * d * d).exp()
}

/// Gate selecting paths longer than `t_i4`: 0 for `t <= t_i4`, otherwise
/// `1 - G(t_i4, t)` with the Gaussian width of `spec`.
pub fn higher_order_gate(t_i4: f64, spec: &GateSpec, t: f64) -> f64 {
    if t <= t_i4 {
        return 0.0;
    }
    let g = GateSpec {
        center: t_i4,
        sigma: spec.sigma,
        kind: GateKind::Gaussian,
    };
    1.0 - gaussian_gate(&g, t)
}

/// Thin-lens phase `e^{-ik|to - from|}`, always of unit modulus.
pub fn thin_lens(from: Vec3, to: Vec3, params: &WaveParams) -> Complex64 {
    let phase = -params.wavenumber() * to.distance(from);
    Complex64::new(phase.cos(), phase.sin())
}
