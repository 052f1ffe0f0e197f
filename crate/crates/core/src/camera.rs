//! Radial polynomial fisheye model.
//!
//! The lens maps the incidence angle θ (angle between a viewing ray and the
//! optical axis) to an image radius around the principal point:
//!
//! ```text
//! r(θ) = a1·θ + a2·θ² + a3·θ³ + a4·θ⁴
//! ```
//!
//! Camera frame: +z along the optical axis, +x right, +y down in the image.
//! The road frame has +z up. `cam_rotation` maps road vectors into the camera
//! frame, so the downward road normal seen from the camera is
//! `cam_rotation · (0, 0, -1)`.
//!
//! Pixel coordinates put integer values at pixel centres.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::UnitVector3;

/// Convergence tolerance of the inverse radius map, in radians.
const INVERSE_TOLERANCE: f64 = 1e-12;
const INVERSE_MAX_ITERATIONS: usize = 200;
/// Slack on the rim test so that a pixel projected exactly at θ_max unprojects.
const RIM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        PixelPoint { u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Intrinsics of the radial model plus the camera pose relative to the road.
#[derive(Debug, Clone, PartialEq)]
pub struct FisheyeCalibration {
    coeffs: [f64; 4],
    principal_point: PixelPoint,
    image_size: (u32, u32),
    theta_max: f64,
    cam_rotation: Matrix3<f64>,
    cam_height: f64,
    rim_radius: f64,
}

/// On-disk form of [`FisheyeCalibration`] (TOML key/value file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub coeffs: [f64; 4],
    pub principal_point: [f64; 2],
    pub image_size: [u32; 2],
    pub theta_max: f64,
    /// Road → camera rotation, row-major.
    #[serde(rename = "R_C")]
    pub cam_rotation: [f64; 9],
    /// Camera height above the road plane in metres.
    #[serde(rename = "eta_C")]
    pub cam_height: f64,
}

impl FisheyeCalibration {
    /// Builds a calibration, validating every invariant of the model.
    pub fn new(
        coeffs: [f64; 4],
        principal_point: PixelPoint,
        image_size: (u32, u32),
        theta_max: f64,
        cam_rotation: Matrix3<f64>,
        cam_height: f64,
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidCalibration(m));
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("coeffs must be finite".into());
        }
        if !principal_point.is_finite() {
            return invalid("principal_point must be finite".into());
        }
        if image_size.0 == 0 || image_size.1 == 0 {
            return invalid("image_size must be non-zero".into());
        }
        if !(theta_max > 0.0 && theta_max <= std::f64::consts::PI) {
            return invalid(format!("theta_max = {theta_max} must lie in (0, pi]"));
        }
        if !is_strictly_increasing(&coeffs, theta_max) {
            return invalid(format!(
                "r(theta) is not strictly increasing on [0, theta_max = {theta_max}]"
            ));
        }
        check_rotation(&cam_rotation).map_err(|m| Error::InvalidCalibration(format!("R_C {m}")))?;
        if !(cam_height.is_finite() && cam_height > 0.0) {
            return invalid(format!("eta_C = {cam_height} must be > 0"));
        }
        let rim_radius = polynomial(&coeffs, theta_max);
        Ok(FisheyeCalibration {
            coeffs,
            principal_point,
            image_size,
            theta_max,
            cam_rotation,
            cam_height,
            rim_radius,
        })
    }

    pub fn from_file(file: &CalibrationFile) -> Result<Self> {
        Self::new(
            file.coeffs,
            PixelPoint::new(file.principal_point[0], file.principal_point[1]),
            (file.image_size[0], file.image_size[1]),
            file.theta_max,
            Matrix3::from_row_slice(&file.cam_rotation),
            file.cam_height,
        )
    }

    pub fn to_file(&self) -> CalibrationFile {
        let r = &self.cam_rotation;
        CalibrationFile {
            coeffs: self.coeffs,
            principal_point: [self.principal_point.u, self.principal_point.v],
            image_size: [self.image_size.0, self.image_size.1],
            theta_max: self.theta_max,
            cam_rotation: [
                r[(0, 0)], r[(0, 1)], r[(0, 2)],
                r[(1, 0)], r[(1, 1)], r[(1, 2)],
                r[(2, 0)], r[(2, 1)], r[(2, 2)],
            ],
            cam_height: self.cam_height,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: CalibrationFile =
            toml::from_str(text).map_err(|e| Error::InvalidCalibration(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("calibration serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidCalibration(m) => {
                Error::InvalidCalibration(format!("{}: {m}", path.display()))
            }
            other => other,
        })
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    pub fn principal_point(&self) -> PixelPoint {
        self.principal_point
    }

    pub fn image_size(&self) -> (u32, u32) {
        self.image_size
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    pub fn cam_rotation(&self) -> &Matrix3<f64> {
        &self.cam_rotation
    }

    pub fn cam_height(&self) -> f64 {
        self.cam_height
    }

    /// Image radius of the field-of-view rim, r(θ_max).
    pub fn rim_radius(&self) -> f64 {
        self.rim_radius
    }

    pub fn radius_of_angle(&self, theta: f64) -> Result<f64> {
        if !(0.0..=self.theta_max).contains(&theta) {
            return Err(Error::AngleOutOfDomain(theta));
        }
        Ok(polynomial(&self.coeffs, theta))
    }

    /// Inverse of [`radius_of_angle`](Self::radius_of_angle): Newton steps
    /// kept inside a shrinking bracket, falling back to bisection whenever
    /// a step would leave it.
    pub fn angle_of_radius(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r <= self.rim_radius * (1.0 + RIM_SLACK)) {
            return Err(Error::OutOfFov(format!(
                "radius {r} px beyond rim {} px",
                self.rim_radius
            )));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        if r >= self.rim_radius {
            return Ok(self.theta_max);
        }
        let (mut lo, mut hi) = (0.0, self.theta_max);
        let mut theta = (r / self.coeffs[0]).clamp(lo, hi);
        for _ in 0..INVERSE_MAX_ITERATIONS {
            let f = polynomial(&self.coeffs, theta) - r;
            if f == 0.0 {
                return Ok(theta);
            }
            if f < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            let slope = derivative(&self.coeffs, theta);
            let newton = theta - f / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - theta).abs() < INVERSE_TOLERANCE || hi - lo < INVERSE_TOLERANCE {
                return Ok(next);
            }
            theta = next;
        }
        Ok(theta)
    }

    /// Lifts a pixel onto the unit sphere (camera frame).
    pub fn unproject(&self, pixel: PixelPoint) -> Result<UnitVector3> {
        if !pixel.is_finite() {
            return Err(Error::OutOfFov("non-finite pixel".into()));
        }
        let dx = pixel.u - self.principal_point.u;
        let dy = pixel.v - self.principal_point.v;
        let rho = dx.hypot(dy);
        let theta = self.angle_of_radius(rho).map_err(|_| {
            Error::OutOfFov(format!("pixel ({}, {}) outside the image rim", pixel.u, pixel.v))
        })?;
        if rho == 0.0 {
            return Ok(UnitVector3::new_unchecked(Vector3::z()));
        }
        let (s, c) = theta.sin_cos();
        UnitVector3::from_vector(Vector3::new(s * dx / rho, s * dy / rho, c))
    }

    /// Projects a viewing ray (camera frame) to pixel coordinates.
    pub fn project(&self, ray: &UnitVector3) -> Result<PixelPoint> {
        let planar = ray.x().hypot(ray.y());
        let theta = planar.atan2(ray.z());
        if theta > self.theta_max * (1.0 + RIM_SLACK) {
            return Err(Error::OutOfFov(format!(
                "ray at polar angle {theta} rad beyond theta_max {}",
                self.theta_max
            )));
        }
        if planar == 0.0 {
            return Ok(self.principal_point);
        }
        let r = polynomial(&self.coeffs, theta.min(self.theta_max));
        Ok(PixelPoint::new(
            self.principal_point.u + r * ray.x() / planar,
            self.principal_point.v + r * ray.y() / planar,
        ))
    }

    /// Downward road normal in the camera frame. A ray `p` points below the
    /// horizon plane through the camera centre iff `p · h > 0`.
    pub fn horizon_vector(&self) -> UnitVector3 {
        UnitVector3::new_unchecked(self.cam_rotation * Vector3::new(0.0, 0.0, -1.0))
    }

    /// True when the pixel lies inside the image bounds (pixel centres at
    /// integer coordinates, so the valid span is [-0.5, size - 0.5)).
    pub fn in_image(&self, pixel: PixelPoint) -> bool {
        pixel.u >= -0.5
            && pixel.v >= -0.5
            && pixel.u < self.image_size.0 as f64 - 0.5
            && pixel.v < self.image_size.1 as f64 - 0.5
    }
}

fn polynomial(a: &[f64; 4], theta: f64) -> f64 {
    theta * (a[0] + theta * (a[1] + theta * (a[2] + theta * a[3])))
}

fn derivative(a: &[f64; 4], theta: f64) -> f64 {
    a[0] + theta * (2.0 * a[1] + theta * (3.0 * a[2] + theta * 4.0 * a[3]))
}

/// r'(θ) > 0 on [0, θ_max]. The minimum of r' over the interval sits at an
/// endpoint or at a root of r'' (a quadratic), so those are the only points
/// that need checking.
fn is_strictly_increasing(a: &[f64; 4], theta_max: f64) -> bool {
    let mut candidates = vec![0.0, theta_max];
    // r''(θ) = 2 a2 + 6 a3 θ + 12 a4 θ²
    let (qa, qb, qc) = (12.0 * a[3], 6.0 * a[2], 2.0 * a[1]);
    if qa.abs() > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            candidates.push((-qb + sq) / (2.0 * qa));
            candidates.push((-qb - sq) / (2.0 * qa));
        }
    } else if qb.abs() > 0.0 {
        candidates.push(-qc / qb);
    }
    candidates
        .into_iter()
        .filter(|t| (0.0..=theta_max).contains(t))
        .all(|t| derivative(a, t) > 0.0)
}

/// Orthonormal with determinant +1 within 1e-9.
pub(crate) fn check_rotation(r: &Matrix3<f64>) -> std::result::Result<(), String> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err("contains non-finite entries".into());
    }
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if err > 1e-9 {
        return Err(format!("is not orthonormal (|R^T R - I| = {err:e})"));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > 1e-9 {
        return Err(format!("has determinant {det}, expected +1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn calib(coeffs: [f64; 4], theta_max: f64) -> FisheyeCalibration {
        FisheyeCalibration::new(
            coeffs,
            PixelPoint::new(320.0, 240.0),
            (640, 480),
            theta_max,
            Matrix3::identity(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn radius_of_identity_polynomial() {
        let c = calib([1.0, 0.0, 0.0, 0.0], 1.0);
        assert_eq!(c.radius_of_angle(0.5).unwrap(), 0.5);
        assert_eq!(c.radius_of_angle(0.0).unwrap(), 0.0);
    }

    #[test]
    fn radius_matches_direct_evaluation_fixture() {
        // 300·1.2 − 20·1.2² + 5·1.2³ − 1.2⁴, evaluated independently.
        let c = calib([300.0, -20.0, 5.0, -1.0], 1.6);
        let r = c.radius_of_angle(1.2).unwrap();
        assert!((r - 337.7664).abs() < 1e-10, "{r}");
        assert_eq!(c.radius_of_angle(0.0).unwrap(), 0.0);
    }

    #[test]
    fn radius_outside_domain_is_an_error() {
        let c = calib([1.0, 0.0, 0.0, 0.0], 1.0);
        assert!(matches!(c.radius_of_angle(1.1), Err(Error::AngleOutOfDomain(_))));
        assert!(c.radius_of_angle(-0.1).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let c = calib([300.0, -20.0, 5.0, -1.0], 1.6);
        let r = c.radius_of_angle(0.7).unwrap();
        assert!((c.angle_of_radius(r).unwrap() - 0.7).abs() < 1e-9);
        assert_eq!(c.angle_of_radius(0.0).unwrap(), 0.0);
        assert!(matches!(c.angle_of_radius(c.rim_radius() + 1.0), Err(Error::OutOfFov(_))));
    }

    #[test]
    fn principal_point_is_the_optical_axis() {
        let c = calib([300.0, -20.0, 5.0, -1.0], 1.6);
        let p = c.unproject(c.principal_point()).unwrap();
        assert_eq!(p.into_vector(), Vector3::z());
        let back = c.project(&p).unwrap();
        assert_eq!(back, c.principal_point());
    }

    #[test]
    fn half_sphere_lens_maps_rim_to_side_axis() {
        let c = calib([200.0, 0.0, 0.0, 0.0], FRAC_PI_2);
        let r = c.radius_of_angle(FRAC_PI_2).unwrap();
        let p = c.unproject(PixelPoint::new(320.0 + r, 240.0)).unwrap();
        assert!((p.into_vector() - Vector3::x()).norm() < 1e-12);
    }

    #[test]
    fn projection_at_fov_boundary_lands_on_rim() {
        let c = calib([190.0, 0.0, -4.0, 0.3], 1.65);
        let ray = UnitVector3::new(1.65f64.sin(), 0.0, 1.65f64.cos()).unwrap();
        let px = c.project(&ray).unwrap();
        assert!((px.u - 320.0 - c.rim_radius()).abs() < 1e-9);
        let behind = UnitVector3::new(0.0, 0.0, -1.0).unwrap();
        assert!(matches!(c.project(&behind), Err(Error::OutOfFov(_))));
        assert!(c.unproject(PixelPoint::new(320.0 + c.rim_radius() + 2.0, 240.0)).is_err());
    }

    #[test]
    fn horizon_vector_identity_and_constructed() {
        let c = calib([1.0, 0.0, 0.0, 0.0], 1.0);
        assert_eq!(c.horizon_vector().into_vector(), Vector3::new(0.0, 0.0, -1.0));
        // road down (0,0,-1) -> camera +y
        let r = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        let c = FisheyeCalibration::new(
            [1.0, 0.0, 0.0, 0.0],
            PixelPoint::new(0.0, 0.0),
            (10, 10),
            1.0,
            r,
            1.0,
        )
        .unwrap();
        assert!((c.horizon_vector().into_vector() - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn loader_rejects_non_monotonic_polynomial() {
        let err = FisheyeCalibration::new(
            [100.0, 0.0, -50.0, 0.0],
            PixelPoint::new(0.0, 0.0),
            (10, 10),
            1.5,
            Matrix3::identity(),
            1.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("strictly increasing"), "{err}");
    }

    #[test]
    fn loader_names_violated_invariants() {
        let base = CalibrationFile {
            coeffs: [190.0, 0.0, -4.0, 0.3],
            principal_point: [319.5, 239.5],
            image_size: [640, 480],
            theta_max: 1.65,
            cam_rotation: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            cam_height: 1.0,
        };
        assert!(FisheyeCalibration::from_file(&base).is_ok());

        let mut bad = base.clone();
        bad.cam_height = 0.0;
        assert!(FisheyeCalibration::from_file(&bad).unwrap_err().to_string().contains("eta_C"));

        let mut bad = base.clone();
        bad.cam_rotation[0] = 2.0;
        let msg = FisheyeCalibration::from_file(&bad).unwrap_err().to_string();
        assert!(msg.contains("R_C") && msg.contains("orthonormal"), "{msg}");

        let mut bad = base.clone();
        bad.cam_rotation = [-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(FisheyeCalibration::from_file(&bad).unwrap_err().to_string().contains("determinant"));

        let mut bad = base;
        bad.theta_max = PI + 0.1;
        assert!(FisheyeCalibration::from_file(&bad).unwrap_err().to_string().contains("theta_max"));
    }

    #[test]
    fn toml_round_trip() {
        let c = calib([190.0, 0.0, -4.0, 0.3], 1.65);
        let text = c.to_toml_string();
        assert!(text.contains("R_C") && text.contains("eta_C"));
        assert_eq!(FisheyeCalibration::from_toml_str(&text).unwrap(), c);
    }
}
