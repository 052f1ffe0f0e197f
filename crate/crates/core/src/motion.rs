//! Camera motion between two frames from planar vehicle odometry.

use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::check_rotation;
use crate::error::{Error, Result};
use crate::odometry::PlanarDelta;
use crate::sphere::UnitVector3;

/// Below this baseline (metres per frame pair) the camera is treated as
/// static.
pub const DEFAULT_MOTION_FLOOR: f64 = 0.005;

/// Rigid camera mounting on the vehicle. The vehicle frame is x forward,
/// y left, z up, with its origin on the road plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Mounting {
    /// Vehicle → camera rotation.
    rotation: Matrix3<f64>,
    /// Camera centre in the vehicle frame, metres.
    position: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountingFile {
    /// Vehicle → camera rotation, row-major.
    pub rotation: [f64; 9],
    /// Camera centre in the vehicle frame, metres.
    pub position: [f64; 3],
}

impl Mounting {
    pub fn new(rotation: Matrix3<f64>, position: Vector3<f64>) -> Result<Self> {
        check_rotation(&rotation).map_err(|m| Error::InvalidMounting(format!("rotation {m}")))?;
        if position.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMounting("position must be finite".into()));
        }
        Ok(Mounting { rotation, position })
    }

    /// A forward-looking camera at `position`, pitched down by `pitch`
    /// radians.
    pub fn forward_facing(position: Vector3<f64>, pitch: f64) -> Self {
        // vehicle x → camera z, vehicle y → camera -x, vehicle z → camera -y
        let base = Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0);
        // tilting the optical axis down is a rotation about the camera x axis
        let tilt = Rotation3::from_axis_angle(&Vector3::x_axis(), pitch);
        Mounting {
            rotation: tilt.matrix() * base,
            position,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.position
    }

    /// Pose of the camera in the world when the vehicle is at `vehicle`
    /// (x, y, heading on the road plane).
    pub fn camera_pose(&self, vehicle: &PlanarDelta) -> CameraPose {
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), vehicle.dpsi);
        let world_from_vehicle = yaw.matrix();
        CameraPose {
            world_from_camera: world_from_vehicle * self.rotation.transpose(),
            center: Vector3::new(vehicle.dx, vehicle.dy, 0.0) + world_from_vehicle * self.position,
        }
    }

    pub fn from_file(file: &MountingFile) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&file.rotation), Vector3::from(file.position))
    }

    pub fn to_file(&self) -> MountingFile {
        let r = &self.rotation;
        MountingFile {
            rotation: [
                r[(0, 0)], r[(0, 1)], r[(0, 2)],
                r[(1, 0)], r[(1, 1)], r[(1, 2)],
                r[(2, 0)], r[(2, 1)], r[(2, 2)],
            ],
            position: self.position.into(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("mounting serializes")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: MountingFile =
            toml::from_str(text).map_err(|e| Error::InvalidMounting(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// Camera orientation and centre in the world (road) frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub world_from_camera: Matrix3<f64>,
    pub center: Vector3<f64>,
}

impl CameraPose {
    pub fn to_camera(&self, world_point: &Vector3<f64>) -> Vector3<f64> {
        self.world_from_camera.transpose() * (world_point - self.center)
    }
}

/// Relative motion between a previous and a current camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePairGeometry {
    /// Previous-camera frame → current-camera frame.
    pub rotation: Matrix3<f64>,
    /// `C - C'` (previous minus current centre) in the current frame, metres.
    pub translation: Vector3<f64>,
    /// `t / |t|`; absent when the pair is degenerate.
    pub epipole: Option<UnitVector3>,
    /// Baseline below the motion floor: the static-camera rule applies.
    pub degenerate: bool,
}

impl FramePairGeometry {
    pub fn between(previous: &CameraPose, current: &CameraPose, motion_floor: f64) -> Self {
        let current_from_world = current.world_from_camera.transpose();
        let rotation = current_from_world * previous.world_from_camera;
        let translation = current_from_world * (previous.center - current.center);
        Self::from_parts(rotation, translation, motion_floor)
    }

    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>, motion_floor: f64) -> Self {
        let degenerate = translation.norm() < motion_floor;
        let epipole = if degenerate {
            None
        } else {
            UnitVector3::from_vector(translation).ok()
        };
        FramePairGeometry {
            rotation,
            translation,
            epipole,
            degenerate,
        }
    }

    /// Same rotation with the translation multiplied by `k`.
    pub fn scaled(&self, k: f64, motion_floor: f64) -> Self {
        Self::from_parts(self.rotation, self.translation * k, motion_floor)
    }
}

/// Camera motion implied by a vehicle pose delta and the camera mounting.
pub fn camera_motion(delta: &PlanarDelta, mounting: &Mounting, motion_floor: f64) -> FramePairGeometry {
    let previous = mounting.camera_pose(&PlanarDelta::ZERO);
    let current = mounting.camera_pose(delta);
    FramePairGeometry::between(&previous, &current, motion_floor)
}
