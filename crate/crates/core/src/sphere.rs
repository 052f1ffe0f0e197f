//! Points on the unit sphere S².

use std::ops::{Deref, Neg};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A viewing ray as a unit 3-vector. Construction always normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVector3(Vector3<f64>);

impl UnitVector3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVector3(v / norm))
    }

    /// Wraps a vector that is already unit length; the caller vouches for it.
    pub(crate) fn new_unchecked(v: Vector3<f64>) -> Self {
        UnitVector3(v)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_vector(self) -> Vector3<f64> {
        self.0
    }

    /// Unsigned angle to `other` in [0, π], computed with atan2 for accuracy
    /// near 0 and π.
    pub fn angle_to(&self, other: &UnitVector3) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }
}

impl Deref for UnitVector3 {
    type Target = Vector3<f64>;

    fn deref(&self) -> &Vector3<f64> {
        &self.0
    }
}

impl Neg for UnitVector3 {
    type Output = UnitVector3;

    fn neg(self) -> UnitVector3 {
        UnitVector3(-self.0)
    }
}

impl TryFrom<[f64; 3]> for UnitVector3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<UnitVector3> for [f64; 3] {
    fn from(v: UnitVector3) -> [f64; 3] {
        [v.0.x, v.0.y, v.0.z]
    }
}

/// Signed angle from `a` to `b` measured about `axis` (right-handed).
pub(crate) fn signed_angle(a: &Vector3<f64>, b: &Vector3<f64>, axis: &Vector3<f64>) -> f64 {
    a.cross(b).dot(axis).atan2(a.dot(b))
}
