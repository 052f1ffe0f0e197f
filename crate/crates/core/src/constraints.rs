//! Geometric motion constraints on the unit sphere.
//!
//! All vectors live in the current camera frame. `p` is the previous-view
//! ray already rotated into that frame, `p_cur` the current-view ray, and
//! `t = C - C'` the translation from the current to the previous camera
//! centre, so the previous camera sits at `t` and the current one at the
//! origin.
//!
//! Each constraint yields a deviation in [0, 1] that is zero for points
//! consistent with a static world:
//!
//! | deviation        | violated by                                        |
//! |------------------|----------------------------------------------------|
//! | epipolar         | motion out of the epipolar plane                   |
//! | positive depth   | in-plane motion that makes the rays diverge        |
//! | positive height  | rays crossing below the road (below horizon only)  |
//! | anti-parallel    | rays crossing above the road with excess angle     |
//! | three-view       | inconsistent triangle angles over three frames     |
//! | static camera    | any flow when the camera does not move             |

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::FramePairGeometry;
use crate::sphere::{signed_angle, UnitVector3};

/// `|p × e'|` below which a feature sits on the epipole.
pub const EPIPOLE_DEGENERACY: f64 = 1e-9;
/// `|p × p'|` below which two rays are parallel.
pub const PARALLEL_RAYS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintThresholds {
    /// Angle-sine slack of the positive height constraint.
    pub lambda_height: f64,
    /// Angle-sine slack of the anti-parallel constraint.
    pub lambda_anti_parallel: f64,
    /// Road-plane displacement (metres) under which the static-camera rule
    /// ignores flow below the horizon.
    pub lambda_static: f64,
}

impl Default for ConstraintThresholds {
    fn default() -> Self {
        ConstraintThresholds {
            lambda_height: 0.001,
            lambda_anti_parallel: 0.001,
            lambda_static: 0.02,
        }
    }
}

/// Epipolar plane of a feature, represented by its pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpipolarFrame {
    /// `n' = (p × e') / |p × e'|`; `None` when `p` lies on the epipole.
    pub normal: Option<UnitVector3>,
    pub epipole: UnitVector3,
}

impl EpipolarFrame {
    pub fn is_degenerate(&self) -> bool {
        self.normal.is_none()
    }
}

pub fn epipolar_frame(p: &UnitVector3, epipole: &UnitVector3) -> EpipolarFrame {
    let cross = p.cross(epipole);
    let normal = if cross.norm() < EPIPOLE_DEGENERACY {
        None
    } else {
        UnitVector3::from_vector(cross).ok()
    };
    EpipolarFrame {
        normal,
        epipole: *epipole,
    }
}

/// `|n' · p'|`, the sine of the angle between `p'` and the epipolar plane.
pub fn epipolar_deviation(frame: &EpipolarFrame, p_cur: &UnitVector3) -> Option<f64> {
    let n = frame.normal?;
    Some(n.dot(p_cur).abs().min(1.0))
}

/// Geodesic distance (radians) from `p'` to the epipolar great circle.
pub fn geodesic_epipolar_deviation(frame: &EpipolarFrame, p_cur: &UnitVector3) -> Option<f64> {
    let n = frame.normal?;
    Some(n.dot(p_cur).clamp(-1.0, 1.0).asin().abs())
}

/// Unit vector of the orthogonal projection of `p'` on the plane with pole `n`.
pub fn project_to_plane(p_cur: &UnitVector3, normal: &UnitVector3) -> Result<UnitVector3> {
    let in_plane = p_cur.into_vector() - normal.as_vector() * normal.dot(p_cur);
    if in_plane.norm() < PARALLEL_RAYS {
        return Err(Error::UndefinedProjection);
    }
    UnitVector3::from_vector(in_plane)
}

/// `|p'_Π × p|` when the rays converge behind the cameras
/// (`n' · (p'_Π × p) > 0`), zero otherwise.
pub fn positive_depth_deviation(p: &UnitVector3, p_plane: &UnitVector3, normal: &UnitVector3) -> f64 {
    let pn = p_plane.cross(p);
    if normal.dot(&pn) > 0.0 {
        pn.norm().min(1.0)
    } else {
        0.0
    }
}

/// Arc-order form of the positive depth test, meaningful only for `p'` on
/// the epipolar plane: a static point must end up closer to `e'` than it
/// started.
pub fn arc_order_violation(p: &UnitVector3, p_cur: &UnitVector3, epipole: &UnitVector3) -> bool {
    p_cur.dot(epipole) < p.dot(epipole)
}

/// Closest approach of two rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Midpoint {
    /// Midpoint of the shortest segment between the two lines.
    pub point: Vector3<f64>,
    /// Parameter along the first ray, `C + s·p`.
    pub s: f64,
    /// Parameter along the second ray, `C' + s'·p'`.
    pub s_cur: f64,
}

impl Midpoint {
    pub fn in_front(&self) -> bool {
        self.s > 0.0 && self.s_cur > 0.0
    }
}

/// Midpoint triangulation of the lines `C + s·p` and `C' + s'·p'`.
/// Returns `None` for parallel rays.
pub fn midpoint_triangulate(
    c: &Vector3<f64>,
    p: &UnitVector3,
    c_cur: &Vector3<f64>,
    p_cur: &UnitVector3,
) -> Option<Midpoint> {
    if p.cross(p_cur).norm() < PARALLEL_RAYS {
        return None;
    }
    // cross-product form: 1 - (p·p')² cancels badly for near-parallel rays
    let n = p.cross(p_cur);
    let denom = n.norm_squared();
    let gap = c_cur - c;
    let s = gap.cross(p_cur).dot(&n) / denom;
    let s_cur = gap.cross(p).dot(&n) / denom;
    let on_first = c + p.as_vector() * s;
    let on_second = c_cur + p_cur.as_vector() * s_cur;
    Some(Midpoint {
        point: 0.5 * (on_first + on_second),
        s,
        s_cur,
    })
}

/// Distance along `p` from the camera to the road plane, `η_C / (p · h)`.
/// `None` for rays at or above the horizon.
pub fn road_scale(p: &UnitVector3, horizon: &UnitVector3, cam_height: f64) -> Option<f64> {
    let cos = p.dot(horizon);
    (cos > 0.0).then(|| cam_height / cos)
}

/// Ray from the current camera to the road point hit by `p` from the
/// previous camera: `normalize(δ_r·p + t)`.
pub fn road_reprojection(p: &UnitVector3, scale: f64, translation: &Vector3<f64>) -> Result<UnitVector3> {
    UnitVector3::from_vector(p.as_vector() * scale + translation).map_err(|_| Error::DegenerateReprojection)
}

/// Position of `p'_Π` relative to the road prediction `p'_r` along the
/// flow arc from `p`, as signed angles about the epipolar pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPositions {
    pub observed: f64,
    pub road: f64,
}

impl ArcPositions {
    pub fn new(p: &UnitVector3, p_plane: &UnitVector3, p_road: &UnitVector3, normal: &UnitVector3) -> Self {
        ArcPositions {
            observed: signed_angle(p, p_plane, normal),
            road: signed_angle(p, p_road, normal),
        }
    }

    fn same_side(&self) -> bool {
        self.observed * self.road > 0.0
    }

    /// `p'_Π` strictly between `p` and `p'_r`: the rays cross beyond the
    /// road point, i.e. below the road.
    pub fn below_road(&self) -> bool {
        self.same_side() && self.observed.abs() < self.road.abs()
    }

    /// `p'_Π` beyond `p'_r`: the rays cross in front of the road point,
    /// i.e. above the road.
    pub fn above_road(&self) -> bool {
        self.same_side() && self.observed.abs() > self.road.abs()
    }
}

fn below_horizon(p: &UnitVector3, p_cur: &UnitVector3, horizon: &UnitVector3) -> bool {
    p.dot(horizon) > 0.0 && p_cur.dot(horizon) > 0.0
}

/// Positive height deviation `max(0, |p'_Π × p'_r| - λ_h)` for rays that
/// cross below the road. `None` unless both rays are below the horizon.
pub fn positive_height_deviation(
    p: &UnitVector3,
    p_cur: &UnitVector3,
    p_plane: &UnitVector3,
    p_road: &UnitVector3,
    horizon: &UnitVector3,
    normal: &UnitVector3,
    lambda: f64,
) -> Option<f64> {
    if !below_horizon(p, p_cur, horizon) {
        return None;
    }
    let arc = ArcPositions::new(p, p_plane, p_road, normal);
    Some(if arc.below_road() {
        excess(p_plane, p_road, lambda)
    } else {
        0.0
    })
}

/// Anti-parallel deviation `max(0, |p'_Π × p'_r| - λ_p)` for rays that cross
/// above the road. `None` unless both rays are below the horizon.
pub fn anti_parallel_deviation(
    p: &UnitVector3,
    p_cur: &UnitVector3,
    p_plane: &UnitVector3,
    p_road: &UnitVector3,
    horizon: &UnitVector3,
    normal: &UnitVector3,
    lambda: f64,
) -> Option<f64> {
    if !below_horizon(p, p_cur, horizon) {
        return None;
    }
    let arc = ArcPositions::new(p, p_plane, p_road, normal);
    Some(if arc.above_road() {
        excess(p_plane, p_road, lambda)
    } else {
        0.0
    })
}

fn excess(p_plane: &UnitVector3, p_road: &UnitVector3, lambda: f64) -> f64 {
    (p_plane.cross(p_road).norm() - lambda).clamp(0.0, 1.0)
}

/// Flow-magnitude rule for a camera that did not move: `|p' × p|`, except
/// below the horizon where road-plane displacements under `λ_s` are
/// attributed to unregistered ego motion.
pub fn static_degenerate_deviation(
    p: &UnitVector3,
    p_cur: &UnitVector3,
    horizon: &UnitVector3,
    cam_height: f64,
    lambda_static: f64,
) -> f64 {
    if let (Some(scale), Some(scale_cur)) = (
        road_scale(p, horizon, cam_height),
        road_scale(p_cur, horizon, cam_height),
    ) {
        let displacement = p_cur.as_vector() * scale_cur - p.as_vector() * scale;
        if displacement.norm() < lambda_static {
            return 0.0;
        }
    }
    p_cur.cross(p).norm().min(1.0)
}

/// A feature tracked over three frames, expressed in the middle camera's
/// frame. Camera centres are `C = t`, `C' = 0`, `C'' = -t'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeViewCorrespondence {
    pub p: UnitVector3,
    pub p_mid: UnitVector3,
    pub p_last: UnitVector3,
    /// `C - C'`, metres.
    pub t: Vector3<f64>,
    /// `C' - C''`, metres.
    pub t_next: Vector3<f64>,
}

impl ThreeViewCorrespondence {
    /// Builds the correspondence from per-view rays and the two frame-pair
    /// geometries (first → middle, middle → last).
    pub fn from_views(
        p_first: &UnitVector3,
        p_mid: &UnitVector3,
        p_last: &UnitVector3,
        first_to_mid: &FramePairGeometry,
        mid_to_last: &FramePairGeometry,
    ) -> Result<Self> {
        // mid_to_last.rotation maps middle → last, so its transpose brings
        // last-frame vectors back into the middle frame
        let last_to_mid = mid_to_last.rotation.transpose();
        Ok(ThreeViewCorrespondence {
            p: UnitVector3::from_vector(first_to_mid.rotation * p_first.into_vector())?,
            p_mid: *p_mid,
            p_last: UnitVector3::from_vector(last_to_mid * p_last.into_vector())?,
            t: first_to_mid.translation,
            t_next: last_to_mid * mid_to_last.translation,
        })
    }
}

/// Three-view angle consistency, computed on the epipolar plane of the
/// first two frames. `None` when the geometry degenerates.
///
/// The point `P_i` is triangulated from the second pair (`C'`, `C''`). The
/// total apex angle `θ_tot` at `P_i` between `C` and `C''` is then compared
/// with the observed angle `θ + θ'` between `p` and `p''`. Orthographic
/// projection onto the plane keeps a static configuration static, so the
/// identity holds exactly for static points whatever the camera path.
pub fn three_view_deviation(c: &ThreeViewCorrespondence, motion_floor: f64) -> Option<f64> {
    const TINY: f64 = 1e-9;
    if c.t.norm() <= motion_floor || c.t_next.norm() <= motion_floor {
        return None;
    }
    let normal = c.t.cross(&c.p);
    if normal.norm() < TINY * c.t.norm() {
        return None;
    }
    let n = normal.normalize();
    let flatten = |v: &Vector3<f64>| v - n * n.dot(v);
    let unit = |v: Vector3<f64>| (v.norm() > TINY).then(|| v.normalize());
    let cross = |a: &Vector3<f64>, b: &Vector3<f64>| n.dot(&a.cross(b));

    // centres: C = t, C' = 0, C'' = -t'
    let first = flatten(&c.t);
    let last = -flatten(&c.t_next);
    if last.norm() < TINY {
        return None;
    }
    let p = unit(flatten(&c.p))?;
    let p_mid = unit(flatten(&c.p_mid))?;
    let p_last = unit(flatten(&c.p_last))?;

    // P_i = s·p' = C'' + u·p''
    let denom = cross(&p_mid, &p_last);
    if denom.abs() < TINY {
        return None;
    }
    let s = cross(&last, &p_last) / denom;
    let u = cross(&last, &p_mid) / denom;
    if s <= 0.0 || u <= 0.0 {
        return None;
    }
    let point = p_mid * s;
    let to_first = unit(first - point)?;
    let to_last = unit(last - point)?;

    let theta_tot = signed_angle(&to_first, &to_last, &n);
    let observed = signed_angle(&(-p), &(-p_last), &n);
    let gap = (observed - theta_tot + PI).rem_euclid(2.0 * PI) - PI;
    Some(if gap.abs() >= FRAC_PI_2 { 1.0 } else { gap.abs().sin() })
}

/// Per-feature deviations. `None` marks a component that does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintDeviations {
    pub epipolar: Option<f64>,
    pub depth: Option<f64>,
    pub height: Option<f64>,
    pub anti_parallel: Option<f64>,
    pub three_view: Option<f64>,
    /// Set only for static-camera frame pairs, where it replaces the rest.
    pub static_camera: Option<f64>,
}

impl ConstraintDeviations {
    /// The applicable components, in fixed order.
    pub fn components(&self) -> [Option<f64>; 5] {
        [self.epipolar, self.depth, self.height, self.anti_parallel, self.three_view]
    }

    pub fn max_component(&self) -> f64 {
        self.components()
            .into_iter()
            .chain(std::iter::once(self.static_camera))
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Scene-level inputs shared by every feature of a frame pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairContext {
    pub geometry: FramePairGeometry,
    pub horizon: UnitVector3,
    pub cam_height: f64,
    pub thresholds: ConstraintThresholds,
}

/// Evaluates every two-view constraint for one correspondence.
pub fn evaluate_correspondence(p: &UnitVector3, p_cur: &UnitVector3, ctx: &PairContext) -> ConstraintDeviations {
    let geom = &ctx.geometry;
    let epipole = match (geom.degenerate, geom.epipole) {
        (false, Some(e)) => e,
        _ => {
            return ConstraintDeviations {
                static_camera: Some(static_degenerate_deviation(
                    p,
                    p_cur,
                    &ctx.horizon,
                    ctx.cam_height,
                    ctx.thresholds.lambda_static,
                )),
                ..Default::default()
            }
        }
    };
    let frame = epipolar_frame(p, &epipole);
    let Some(normal) = frame.normal else {
        return ConstraintDeviations::default();
    };
    let mut out = ConstraintDeviations {
        epipolar: epipolar_deviation(&frame, p_cur),
        ..Default::default()
    };
    let Ok(p_plane) = project_to_plane(p_cur, &normal) else {
        return out;
    };
    out.depth = Some(positive_depth_deviation(p, &p_plane, &normal));

    let p_road = road_scale(p, &ctx.horizon, ctx.cam_height)
        .and_then(|scale| road_reprojection(p, scale, &geom.translation).ok());
    if let Some(p_road) = p_road {
        let th = &ctx.thresholds;
        out.height =
            positive_height_deviation(p, p_cur, &p_plane, &p_road, &ctx.horizon, &normal, th.lambda_height);
        out.anti_parallel = anti_parallel_deviation(
            p,
            p_cur,
            &p_plane,
            &p_road,
            &ctx.horizon,
            &normal,
            th.lambda_anti_parallel,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn uv(x: f64, y: f64, z: f64) -> UnitVector3 {
        UnitVector3::new(x, y, z).unwrap()
    }

    #[test]
    fn epipolar_frame_of_orthogonal_axes() {
        let f = epipolar_frame(&uv(0.0, 0.0, 1.0), &uv(1.0, 0.0, 0.0));
        assert_eq!(f.normal.unwrap().into_vector(), Vector3::new(0.0, 1.0, 0.0));
        let p = uv(0.3, -0.2, 0.9);
        assert!(epipolar_frame(&p, &p).is_degenerate());
    }

    #[test]
    fn epipolar_deviation_zero_in_plane_one_at_pole() {
        let f = epipolar_frame(&uv(0.0, 0.0, 1.0), &uv(1.0, 0.0, 0.0));
        assert_eq!(epipolar_deviation(&f, &uv(1.0, 0.0, 1.0)), Some(0.0));
        assert_eq!(epipolar_deviation(&f, &uv(0.0, 1.0, 0.0)), Some(1.0));
        assert_eq!(geodesic_epipolar_deviation(&f, &uv(1.0, 0.0, 1.0)), Some(0.0));
        let g = geodesic_epipolar_deviation(&f, &uv(0.0, -1.0, 0.0)).unwrap();
        assert!((g - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let degenerate = epipolar_frame(&uv(1.0, 0.0, 0.0), &uv(1.0, 0.0, 0.0));
        assert_eq!(epipolar_deviation(&degenerate, &uv(0.0, 1.0, 0.0)), None);
    }

    #[test]
    fn plane_projection() {
        let n = uv(0.0, 1.0, 0.0);
        let on = uv(0.6, 0.0, 0.8);
        assert_eq!(project_to_plane(&on, &n).unwrap(), on);
        let tilted = uv(1.0, 1.0, 0.0);
        let proj = project_to_plane(&tilted, &n).unwrap();
        assert!((proj.into_vector() - Vector3::x()).norm() < 1e-15);
        assert!((tilted.angle_to(&proj) - FRAC_PI_4).abs() < 1e-15);
        assert!(matches!(project_to_plane(&n, &n), Err(Error::UndefinedProjection)));
    }

    #[test]
    fn positive_depth_parallel_rays_are_not_moving() {
        let p = uv(0.1, 0.2, 0.9);
        let e = uv(0.0, 0.0, -1.0);
        let n = epipolar_frame(&p, &e).normal.unwrap();
        assert_eq!(positive_depth_deviation(&p, &p, &n), 0.0);
    }

    #[test]
    fn positive_depth_measures_divergence_angle() {
        // camera moved 1 m forward (t = (0,0,-1)); point moved away along
        // the epipolar plane so its ray rotated towards the front by `gamma`
        let e = uv(0.0, 0.0, -1.0);
        let p = uv(1.0, 0.0, 1.0);
        let gamma: f64 = 0.05;
        let base = FRAC_PI_4 - gamma;
        let p_cur = uv(base.sin(), 0.0, base.cos());
        let n = epipolar_frame(&p, &e).normal.unwrap();
        let p_plane = project_to_plane(&p_cur, &n).unwrap();
        let xi = positive_depth_deviation(&p, &p_plane, &n);
        assert!((xi - gamma.sin()).abs() < 1e-15, "{xi}");
        // the mirrored motion (towards the epipole) converges in front
        let fwd = FRAC_PI_4 + gamma;
        let p_static = uv(fwd.sin(), 0.0, fwd.cos());
        assert_eq!(positive_depth_deviation(&p, &p_static, &n), 0.0);
    }

    #[test]
    fn midpoint_recovers_constructed_point() {
        let c = Vector3::new(0.0, 0.0, 0.0);
        let c2 = Vector3::new(1.0, 0.0, 0.0);
        let x = Vector3::new(0.5, 0.0, 2.0);
        let p = UnitVector3::from_vector(x - c).unwrap();
        let p2 = UnitVector3::from_vector(x - c2).unwrap();
        let m = midpoint_triangulate(&c, &p, &c2, &p2).unwrap();
        assert!((m.point - x).norm() < 1e-9);
        assert!(m.in_front());
        assert!(midpoint_triangulate(&c, &p, &c2, &p).is_none());
    }

    #[test]
    fn midpoint_behind_gives_negative_parameter() {
        // rays aimed away from a point behind both cameras
        let c = Vector3::new(0.0, 0.0, 0.0);
        let c2 = Vector3::new(1.0, 0.0, 0.0);
        let x = Vector3::new(0.5, 0.0, -2.0);
        let p = UnitVector3::from_vector(c - x).unwrap();
        let p2 = UnitVector3::from_vector(c2 - x).unwrap();
        let m = midpoint_triangulate(&c, &p, &c2, &p2).unwrap();
        assert!(m.s < 0.0 && m.s_cur < 0.0);
        assert!((m.point - x).norm() < 1e-9);
    }

    #[test]
    fn road_scale_cases() {
        let h = uv(0.0, 1.0, 0.0);
        assert_eq!(road_scale(&h, &h, 1.3), Some(1.3));
        let sixty = std::f64::consts::FRAC_PI_3;
        let p = uv(sixty.sin(), sixty.cos(), 0.0);
        assert!((road_scale(&p, &h, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(road_scale(&uv(0.0, -0.1, 1.0), &h, 1.0), None);
        assert_eq!(road_scale(&uv(0.0, 0.0, 1.0), &h, 1.0), None);
    }

    #[test]
    fn road_reprojection_cases() {
        let p = uv(0.0, 1.0, 2.0);
        assert_eq!(road_reprojection(&p, 3.0, &Vector3::zeros()).unwrap(), p);
        // road point 2 m ahead, 1 m down; camera advanced 1 m
        let h = uv(0.0, 1.0, 0.0);
        let ahead = uv(0.0, 1.0, 2.0);
        let scale = road_scale(&ahead, &h, 1.0).unwrap();
        let seen = road_reprojection(&ahead, scale, &Vector3::new(0.0, 0.0, -1.0)).unwrap();
        assert!((seen.into_vector() - uv(0.0, 1.0, 1.0).into_vector()).norm() < 1e-15);
        assert!(road_reprojection(&ahead, scale, &(-(ahead.into_vector() * scale))).is_err());
    }

    #[test]
    fn static_camera_rule() {
        let h = uv(0.0, 1.0, 0.0);
        let p = uv(0.2, 1.0, 3.0);
        assert_eq!(static_degenerate_deviation(&p, &p, &h, 1.0, 0.02), 0.0);

        // road point 3 m ahead moves 1 cm sideways on the road
        let x = Vector3::new(0.2, 1.0, 3.0);
        let p = UnitVector3::from_vector(x).unwrap();
        let p_cur = UnitVector3::from_vector(x + Vector3::new(0.01, 0.0, 0.0)).unwrap();
        assert_eq!(static_degenerate_deviation(&p, &p_cur, &h, 1.0, 0.02), 0.0);
        assert!(static_degenerate_deviation(&p, &p_cur, &h, 1.0, 0.005) > 0.0);

        // above the horizon the flow magnitude is reported directly
        let five = 5f64.to_radians();
        let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), five);
        let level = uv(1.0, 0.0, 0.0);
        let turned = UnitVector3::from_vector(rot * level.into_vector()).unwrap();
        let xi = static_degenerate_deviation(&level, &turned, &h, 1.0, 0.02);
        assert!((xi - five.sin()).abs() < 1e-15 && (xi - 0.0872).abs() < 1e-4);
    }

    #[test]
    fn three_view_requires_motion_in_both_pairs() {
        let c = ThreeViewCorrespondence {
            p: uv(0.3, 0.0, 1.0),
            p_mid: uv(0.35, 0.0, 1.0),
            p_last: uv(0.4, 0.0, 1.0),
            t: Vector3::new(0.0, 0.0, -0.5),
            t_next: Vector3::zeros(),
        };
        assert_eq!(three_view_deviation(&c, 0.005), None);
    }
}
