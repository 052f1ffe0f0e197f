use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::camera::{FisheyeCalibration, PixelPoint};
use crate::error::{Error, Result};
use crate::motion::{Mounting, MountingFile};

/// Motion classes of the canonical scenes, plus parked objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectClass {
    Crossing,
    Overtaking,
    Preceding,
    Approaching,
    StaticEgo,
    Parked,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 6] = [
        ObjectClass::Crossing,
        ObjectClass::Overtaking,
        ObjectClass::Preceding,
        ObjectClass::Approaching,
        ObjectClass::StaticEgo,
        ObjectClass::Parked,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ObjectClass::Crossing => "crossing",
            ObjectClass::Overtaking => "overtaking",
            ObjectClass::Preceding => "preceding",
            ObjectClass::Approaching => "approaching",
            ObjectClass::StaticEgo => "static-ego",
            ObjectClass::Parked => "parked",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown object class {s:?}")))
    }
}

/// Axis-aligned box in world coordinates (metres, z up, road at z = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Cuboid {
    /// Box of size `length × width × height` whose footprint is centred on
    /// `(x, y)`, spanning `z_bottom..z_bottom + height`.
    pub fn on_ground(x: f64, y: f64, z_bottom: f64, length: f64, width: f64, height: f64) -> Self {
        Cuboid {
            min: [x - length / 2.0, y - width / 2.0, z_bottom],
            max: [x + length / 2.0, y + width / 2.0, z_bottom + height],
        }
    }

    pub fn min(&self) -> Vector3<f64> {
        Vector3::from(self.min)
    }

    pub fn max(&self) -> Vector3<f64> {
        Vector3::from(self.max)
    }

    pub fn center(&self) -> Vector3<f64> {
        0.5 * (self.min() + self.max())
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> Cuboid {
        Cuboid {
            min: (self.min() + offset).into(),
            max: (self.max() + offset).into(),
        }
    }

    fn is_valid(&self) -> bool {
        (0..3).all(|i| self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] < self.max[i])
    }

    /// Entry distance of the ray `origin + s·dir` (slab method), if the ray
    /// hits the box at `s > 0`.
    pub fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let (mut near, mut far) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..3 {
            if dir[i] == 0.0 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let a = (self.min[i] - origin[i]) / dir[i];
            let b = (self.max[i] - origin[i]) / dir[i];
            near = near.max(a.min(b));
            far = far.min(a.max(b));
        }
        (near <= far && near > 0.0).then_some(near)
    }

    /// Points along the twelve edges, `per_edge` samples each (endpoints
    /// included).
    pub fn edge_samples(&self, per_edge: usize) -> Vec<Vector3<f64>> {
        let (lo, hi) = (self.min(), self.max());
        let corner = |i: usize| {
            Vector3::new(
                if i & 1 == 0 { lo.x } else { hi.x },
                if i & 2 == 0 { lo.y } else { hi.y },
                if i & 4 == 0 { lo.z } else { hi.z },
            )
        };
        let n = per_edge.max(2);
        let mut out = Vec::with_capacity(12 * n);
        for a in 0..8 {
            for bit in [1, 2, 4] {
                if a & bit == 0 {
                    let (p, q) = (corner(a), corner(a | bit));
                    out.extend((0..n).map(|k| p + (q - p) * (k as f64 / (n - 1) as f64)));
                }
            }
        }
        out
    }
}

/// A rigid box moving at constant velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: u32,
    pub class: ObjectClass,
    /// Pose at time zero.
    pub shape: Cuboid,
    /// World velocity, m/s.
    pub velocity: [f64; 3],
}

impl SceneObject {
    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::from(self.velocity)
    }

    pub fn is_moving(&self) -> bool {
        self.velocity.iter().any(|&v| v != 0.0)
    }

    pub fn at(&self, time: f64) -> Cuboid {
        self.shape.translated(&(self.velocity() * time))
    }
}

/// Host vehicle driving with constant wheel speed and yaw rate from the
/// world origin, heading along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostMotion {
    pub speed: f64,
    #[serde(default)]
    pub yaw_rate: f64,
}

/// Intrinsic part of the calibration; the extrinsic part comes from the
/// mounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lens {
    pub coeffs: [f64; 4],
    pub principal_point: [f64; 2],
    pub image_size: [u32; 2],
    pub theta_max: f64,
}

impl Default for Lens {
    fn default() -> Self {
        Lens {
            coeffs: [190.0, 0.0, -4.0, 0.3],
            principal_point: [319.5, 239.5],
            image_size: [640, 480],
            theta_max: 95f64.to_radians(),
        }
    }
}

pub const DEFAULT_FRAME_RATE: f64 = 15.0;
pub const DEFAULT_ROAD_EXTENT: f64 = 500.0;

fn default_road_extent() -> f64 {
    DEFAULT_ROAD_EXTENT
}

/// Complete description of a synthetic sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub frame_rate: f64,
    /// Number of frames; flow is produced for each consecutive pair.
    pub frames: usize,
    /// Standard deviation of the Gaussian noise added to flow end points,
    /// pixels.
    #[serde(default)]
    pub noise_sigma: f64,
    /// Road visible up to this horizontal distance from the camera, metres.
    #[serde(default = "default_road_extent")]
    pub road_extent: f64,
    pub lens: Lens,
    pub mounting: MountingFile,
    pub host: HostMotion,
    /// Static boxes.
    #[serde(default)]
    pub structures: Vec<Cuboid>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return bad(format!("frame_rate = {} must be > 0", self.frame_rate));
        }
        if self.frames < 2 {
            return bad(format!("frames = {} must be at least 2", self.frames));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma = {} must be >= 0", self.noise_sigma));
        }
        if !(self.road_extent > 0.0) {
            return bad(format!("road_extent = {} must be > 0", self.road_extent));
        }
        if !(self.host.speed.is_finite() && self.host.speed >= 0.0 && self.host.yaw_rate.is_finite()) {
            return bad("host speed must be finite and >= 0".into());
        }
        for c in &self.structures {
            if !c.is_valid() {
                return bad(format!("structure {c:?} is not a proper box"));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for o in &self.objects {
            if !o.shape.is_valid() || o.velocity.iter().any(|v| !v.is_finite()) {
                return bad(format!("object {} has an invalid shape or velocity", o.id));
            }
            if !ids.insert(o.id) {
                return bad(format!("duplicate object id {}", o.id));
            }
        }
        self.mounting()?;
        self.calibration()?;
        Ok(())
    }

    pub fn mounting(&self) -> Result<Mounting> {
        Mounting::from_file(&self.mounting)
    }

    /// Calibration whose road rotation and height follow the mounting.
    pub fn calibration(&self) -> Result<FisheyeCalibration> {
        let mounting = self.mounting()?;
        FisheyeCalibration::new(
            self.lens.coeffs,
            PixelPoint::new(self.lens.principal_point[0], self.lens.principal_point[1]),
            (self.lens.image_size[0], self.lens.image_size[1]),
            self.lens.theta_max,
            *mounting.rotation(),
            mounting.position().z,
        )
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SceneSpec = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("scene: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scene serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}
