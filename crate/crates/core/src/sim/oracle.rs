//! Brute-force classification of a correspondence by explicit 3D
//! triangulation, used to cross-check the spherical constraints.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constraints::{midpoint_triangulate, ConstraintThresholds};
use crate::error::{Error, Result};
use crate::motion::FramePairGeometry;
use crate::sphere::UnitVector3;

/// Plane distance above which `p'` leaves the epipolar plane.
pub const EPIPOLAR_TOLERANCE: f64 = 1e-6;
/// Height (metres) below the road plane a triangulated point must reach to
/// count as below it; absorbs rounding for points on the road.
pub const HEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleLabel {
    StaticConsistent,
    EpipolarViolating,
    /// The in-plane rays are parallel and never meet.
    Parallel,
    BehindConvergence,
    BelowRoad,
    AboveRoadExcess,
}

/// Road plane seen from the current camera: points `Y` with `Y · h = η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadPlane {
    pub down: UnitVector3,
    pub height: f64,
}

/// Labels the correspondence `(p, p')` (previous ray already rotated into
/// the current frame). Priority: epipolar, parallel, behind, below road,
/// above road with excess angle.
pub fn oracle_classify(
    p: &UnitVector3,
    p_cur: &UnitVector3,
    geom: &FramePairGeometry,
    road: &RoadPlane,
    thresholds: &ConstraintThresholds,
    motion_floor: f64,
) -> Result<OracleLabel> {
    let t = geom.translation;
    if t.norm() < motion_floor {
        return Err(Error::DegenerateGeometry("camera baseline below the motion floor".into()));
    }
    let previous: Vector3<f64> = t;
    let current = Vector3::zeros();

    // plane through both centres and the first ray
    let normal = t.cross(p);
    if normal.norm() < 1e-9 * t.norm() {
        return Err(Error::DegenerateGeometry("feature on the baseline".into()));
    }
    let normal = normal.normalize();
    let off_plane = normal.dot(p_cur);
    if off_plane.abs() > EPIPOLAR_TOLERANCE {
        return Ok(OracleLabel::EpipolarViolating);
    }

    let in_plane = UnitVector3::from_vector(p_cur.into_vector() - normal * off_plane)?;
    let Some(mid) = midpoint_triangulate(&previous, p, &current, &in_plane) else {
        return Ok(OracleLabel::Parallel);
    };
    if mid.s <= 0.0 || mid.s_cur <= 0.0 {
        return Ok(OracleLabel::BehindConvergence);
    }

    let down = road.down.into_vector();
    if down.dot(p) <= 0.0 || down.dot(p_cur) <= 0.0 {
        return Ok(OracleLabel::StaticConsistent);
    }
    let depth_below_camera = mid.point.dot(&down);
    if depth_below_camera > road.height + HEIGHT_TOLERANCE {
        return Ok(OracleLabel::BelowRoad);
    }
    // road point along the first ray, seen from the current camera
    let s_road = (road.height - previous.dot(&down)) / down.dot(p);
    let road_point = previous + p.as_vector() * s_road;
    let sine = in_plane.cross(&road_point.normalize()).norm();
    if depth_below_camera < road.height && sine > thresholds.lambda_anti_parallel {
        return Ok(OracleLabel::AboveRoadExcess);
    }
    Ok(OracleLabel::StaticConsistent)
}
