//! Minimal 3D vector math plus the unit-vector newtype used for points on
//! the sphere.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::tol;

/// Plain 3D vector over `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scalar triple product `self · (b × c)`: six times the signed volume
    /// of the tetrahedron (0, self, b, c).
    pub fn triple(self, b: Vec3, c: Vec3) -> f64 {
        self.dot(b.cross(c))
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Component array, handy for serialization.
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Vec3 {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

/// A vector guaranteed to have norm 1 within [`tol::COINCIDENT`].
///
/// Every point on the sphere in this crate is a `UnitVec`; constructing one
/// re-normalizes, so downstream code never re-checks lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec(Vec3);

impl UnitVec {
    /// Normalizes `v`. Fails with [`Error::ZeroLength`] when `|v|` is too
    /// small to give a direction.
    pub fn new(v: Vec3) -> Result<UnitVec> {
        let n = v.norm();
        if n < tol::COINCIDENT {
            return Err(Error::ZeroLength);
        }
        Ok(UnitVec(v.scale(1.0 / n)))
    }

    /// Convenience constructor from components.
    pub fn from_xyz(x: f64, y: f64, z: f64) -> Result<UnitVec> {
        UnitVec::new(Vec3::new(x, y, z))
    }

    /// The underlying vector.
    pub fn as_vec3(self) -> Vec3 {
        self.0
    }

    /// Antipodal point.
    pub fn antipode(self) -> UnitVec {
        UnitVec(-self.0)
    }

    /// Great-circle (geodesic) distance to `other`, in radians.
    ///
    /// Uses `atan2(|a × b|, a · b)`, which stays accurate for nearly
    /// parallel and nearly antipodal pairs alike.
    pub fn arc_to(self, other: UnitVec) -> f64 {
        let cross = self.0.cross(other.0).norm();
        let dot = self.0.dot(other.0);
        cross.atan2(dot)
    }

    /// Chord (straight-line) distance to `other`.
    pub fn chord_to(self, other: UnitVec) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl Deref for UnitVec {
    type Target = Vec3;
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl From<UnitVec> for Vec3 {
    fn from(u: UnitVec) -> Vec3 {
        u.0
    }
}
