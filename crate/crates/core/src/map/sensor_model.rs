//! Depth observation model: axial noise grows quadratically with range and
//! the endpoint voxel receives the probability mass of one grid cell around
//! the measured range.

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Upper bound on the returned hit probability. The exact value rounds to
/// 1.0 in f64 for short ranges, which is not a valid occupancy likelihood.
pub const MAX_HIT_PROBABILITY: f64 = 1.0 - 1e-15;

/// Axial standard deviation `lambda_a * z^2`.
pub fn axial_sigma(range: f64, axial_scale: f64) -> f64 {
    axial_scale * range * range
}

/// Probability that the true surface lies within the cell centred on the
/// measured range: `F(z + d/2) - F(z - d/2)` for a normal CDF `F` centred on
/// `z` with standard deviation `axial_sigma(z)`.
pub fn endpoint_hit_probability(measured_range: f64, axial_scale: f64, resolution: f64) -> Result<f64> {
    if !(measured_range > 0.0 && axial_scale > 0.0 && resolution > 0.0) {
        return Err(Error::Domain(format!(
            "hit probability needs positive inputs (range {measured_range}, lambda_a {axial_scale}, resolution {resolution})"
        )));
    }
    let sigma = axial_sigma(measured_range, axial_scale);
    // Symmetric window around the mean: F(z+h) - F(z-h) = erf(h / (sigma sqrt 2)).
    let half = 0.5 * resolution;
    let p = erf(half / (sigma * std::f64::consts::SQRT_2));
    Ok(p.clamp(f64::MIN_POSITIVE, MAX_HIT_PROBABILITY))
}
