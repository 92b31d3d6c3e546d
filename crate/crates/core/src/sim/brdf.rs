use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Surface reflectance model of a patch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Material {
    #[default]
    Lambertian,
    /// Energy-normalized Phong lobe around the mirror direction.
    Phong { exponent: f64 },
}

/// Evaluate the BRDF for light arriving from `incoming` and leaving along
/// `outgoing`. Both directions point away from the surface. Directions below
/// the surface give 0.
pub fn brdf_eval(
    material: Material,
    albedo: f64,
    incoming: Vec3,
    outgoing: Vec3,
    normal: Vec3,
) -> f64 {
    let cos_in = normal.dot(incoming);
    let cos_out = normal.dot(outgoing);
    if cos_in <= 0.0 || cos_out <= 0.0 {
        return 0.0;
    }
    match material {
        Material::Lambertian => albedo / PI,
        Material::Phong { exponent } => {
            let mirror = normal * (2.0 * cos_in) - incoming;
            let c = mirror.dot(outgoing).max(0.0);
            albedo * (exponent + 2.0) / (2.0 * PI) * c.powf(exponent)
        }
    }
}
