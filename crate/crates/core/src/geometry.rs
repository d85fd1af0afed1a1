//! Unit vectors on the sphere and orthonormal frames built around them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A direction on the unit sphere: a measurement setting or a hidden
/// variable of a continuous model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitVec3 = UnitVec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: UnitVec3 = UnitVec3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`. Fails on the zero vector and on non-finite input.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid(format!(
                "cannot normalize vector ({x}, {y}, {z})"
            )));
        }
        Ok(Self::from_normalized(x / norm, y / norm, z / norm))
    }

    /// Builds a vector from components already known to have unit norm.
    /// Renormalizes once to absorb rounding.
    pub(crate) fn from_normalized(x: f64, y: f64, z: f64) -> Self {
        let norm = (x * x + y * y + z * z).sqrt();
        UnitVec3 {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    /// Direction with polar angle `theta` from +z and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::from_normalized(st * cp, st * sp, ct)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Inner product clamped to `[-1, 1]`.
    pub fn dot(&self, other: &UnitVec3) -> f64 {
        raw_dot(self.components(), other.components()).clamp(-1.0, 1.0)
    }

    pub fn cross(&self, other: &UnitVec3) -> [f64; 3] {
        cross(self.components(), other.components())
    }

    /// Angle in `[0, π]` between two directions.
    pub fn angle_to(&self, other: &UnitVec3) -> f64 {
        // atan2 of |u×v| and u·v stays accurate near 0 and π where acos does not.
        let c = self.cross(other);
        let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        s.atan2(raw_dot(self.components(), other.components()))
    }

    pub fn neg(&self) -> UnitVec3 {
        UnitVec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Free-function form of [`UnitVec3::new`].
pub fn unit(x: f64, y: f64, z: f64) -> Result<UnitVec3> {
    UnitVec3::new(x, y, z)
}

/// Free-function form of [`UnitVec3::dot`].
pub fn dot(u: &UnitVec3, v: &UnitVec3) -> f64 {
    u.dot(v)
}

fn raw_dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Right-handed orthonormal triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: UnitVec3,
    pub e2: UnitVec3,
    pub e3: UnitVec3,
}

impl Frame {
    /// Maps local coordinates `(a, b, c)` to `a·e1 + b·e2 + c·e3`.
    pub fn to_world(&self, a: f64, b: f64, c: f64) -> [f64; 3] {
        let (e1, e2, e3) = (self.e1, self.e2, self.e3);
        [
            a * e1.x + b * e2.x + c * e3.x,
            a * e1.y + b * e2.y + c * e3.y,
            a * e1.z + b * e2.z + c * e3.z,
        ]
    }
}

/// Frame with `e3 = n`. `e1` is the coordinate axis least aligned with `n`
/// (ties go x, then y, then z) made orthogonal to `n`; `e2 = e3 × e1`.
pub fn orthonormal_frame(n: &UnitVec3) -> Frame {
    let comps = n.components();
    let mut axis = 0;
    for i in 1..3 {
        if comps[i].abs() < comps[axis].abs() {
            axis = i;
        }
    }
    let mut seed = [0.0; 3];
    seed[axis] = 1.0;
    let proj = comps[axis];
    let e1 = UnitVec3::from_normalized(
        seed[0] - proj * comps[0],
        seed[1] - proj * comps[1],
        seed[2] - proj * comps[2],
    );
    let c = cross(comps, e1.components());
    let e2 = UnitVec3::from_normalized(c[0], c[1], c[2]);
    Frame { e1, e2, e3: *n }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn assert_frame_invariants(f: &Frame) {
        for v in [f.e1, f.e2, f.e3] {
            assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
        assert!(raw_dot(f.e1.components(), f.e2.components()).abs() <= 1e-12);
        assert!(raw_dot(f.e1.components(), f.e3.components()).abs() <= 1e-12);
        assert!(raw_dot(f.e2.components(), f.e3.components()).abs() <= 1e-12);
        assert!(close(f.e1.cross(&f.e2), f.e3.components(), 1e-12));
    }

    #[test]
    fn unit_normalizes() {
        assert_eq!(unit(0.0, 0.0, 2.0).unwrap().components(), [0.0, 0.0, 1.0]);
        assert_eq!(unit(1.0, 0.0, 0.0).unwrap().components(), [1.0, 0.0, 0.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(unit(1.0, 1.0, 0.0).unwrap().components(), [h, h, 0.0], 1e-15));
    }

    #[test]
    fn unit_rejects_zero_and_nan() {
        assert!(matches!(unit(0.0, 0.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(unit(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn dot_examples() {
        let u = UnitVec3::X;
        assert_eq!(dot(&u, &u), 1.0);
        assert_eq!(dot(&UnitVec3::X, &UnitVec3::Y), 0.0);
        assert_eq!(dot(&UnitVec3::X, &UnitVec3::X.neg()), -1.0);
        let w = unit(0.3, -0.4, 0.5).unwrap();
        assert!(dot(&w, &w) <= 1.0);
    }

    #[test]
    fn canonical_frame_for_z() {
        let f = orthonormal_frame(&UnitVec3::Z);
        assert_eq!(f.e1.components(), [1.0, 0.0, 0.0]);
        assert_eq!(f.e2.components(), [0.0, 1.0, 0.0]);
        assert_eq!(f.e3.components(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn frames_are_orthonormal() {
        let f = orthonormal_frame(&UnitVec3::X);
        assert_eq!(f.e3, UnitVec3::X);
        assert_frame_invariants(&f);
        let diag = unit(1.0, 1.0, 1.0).unwrap();
        assert_frame_invariants(&orthonormal_frame(&diag));
        assert_frame_invariants(&orthonormal_frame(&unit(-1e-9, 0.2, -3.0).unwrap()));
    }

    #[test]
    fn angle_between_settings() {
        let a = UnitVec3::X.angle_to(&UnitVec3::Y);
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((UnitVec3::X.angle_to(&UnitVec3::X.neg()) - std::f64::consts::PI).abs() < 1e-15);
    }
}
