//! Samplers on the unit sphere.

use std::f64::consts::PI;

use crate::geometry::{orthonormal_frame, UnitVec3};
use crate::rng::RandomStream;

/// Sign with `sgn(0) = +1`.
pub fn sgn(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Uniform direction: `cos θ` uniform on `[-1, 1]`, azimuth uniform on `[0, 2π)`.
pub fn sample_uniform_sphere(stream: &mut RandomStream) -> UnitVec3 {
    let c = 2.0 * stream.next_f64() - 1.0;
    let phi = 2.0 * PI * stream.next_f64();
    let s = (1.0 - c * c).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    UnitVec3::from_normalized(s * cp, s * sp, c)
}

/// Inverse CDF of the density `|c|` on `[-1, 1]`.
pub fn cosine_weighted_cos(u: f64) -> f64 {
    if u < 0.5 {
        -(1.0 - 2.0 * u).sqrt()
    } else {
        (2.0 * u - 1.0).sqrt()
    }
}

/// Direction with density `|axis·λ| / 2π` on the sphere.
pub fn sample_cosine_weighted(axis: &UnitVec3, stream: &mut RandomStream) -> UnitVec3 {
    let c = cosine_weighted_cos(stream.next_f64());
    let phi = 2.0 * PI * stream.next_f64();
    let s = (1.0 - c * c).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let frame = orthonormal_frame(axis);
    let [x, y, z] = frame.to_world(s * cp, s * sp, c);
    UnitVec3::from_normalized(x, y, z)
}
