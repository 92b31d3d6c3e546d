use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{storage_precision, ImpulseResponse};
use crate::error::{Error, Result};

/// Photon shot-noise model: each bin becomes `Poisson(scale * value) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Expected photon count per unit of simulated flux.
    pub scale: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise scale must be positive and finite, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Replace every bin with a Poisson draw. Bins are visited in storage order
/// from a single seeded stream, so the result depends only on `h` and `spec`.
pub fn apply_noise(h: &ImpulseResponse, spec: &NoiseSpec) -> Result<ImpulseResponse> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(h.data.len());
    for &v in &h.data {
        let mean = spec.scale * v;
        let noisy = if mean > 0.0 {
            let dist = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
            let count: f64 = dist.sample(&mut rng);
            count / spec.scale
        } else {
            0.0
        };
        data.push(storage_precision(noisy));
    }
    Ok(ImpulseResponse {
        topology: h.topology.clone(),
        time_axis: h.time_axis,
        data,
    })
}
