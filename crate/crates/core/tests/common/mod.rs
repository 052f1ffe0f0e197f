//! Random two-view configurations shared by the integration tests.
//!
//! Frames follow the pipeline: the previous ray is already rotated into the
//! current camera frame, the current centre is the origin and the previous
//! centre is `t`. Both centres sit `height` above the road, whose downward
//! normal is `down`.

#![allow(dead_code)]

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spheremotion::constraints::{ConstraintThresholds, PairContext};
use spheremotion::motion::{FramePairGeometry, DEFAULT_MOTION_FLOOR};
use spheremotion::sim::RoadPlane;
use spheremotion::UnitVector3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(v: Vector3<f64>) -> UnitVector3 {
    UnitVector3::from_vector(v).expect("non-zero vector")
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A unit vector orthogonal to `axis`.
pub fn random_orthogonal(rng: &mut impl Rng, axis: &Vector3<f64>) -> Vector3<f64> {
    loop {
        let v = random_unit(rng);
        let w = v - axis * axis.dot(&v);
        if w.norm() > 0.1 {
            return w.normalize();
        }
    }
}

/// Scene-level part of a configuration.
#[derive(Debug, Clone, Copy)]
pub struct Rig {
    pub down: Vector3<f64>,
    pub height: f64,
    pub translation: Vector3<f64>,
}

impl Rig {
    pub fn random(rng: &mut impl Rng) -> Self {
        // pitched forward camera: down is +y tilted towards +z
        let pitch: f64 = rng.random_range(-0.5..0.5);
        let down = Vector3::new(0.0, pitch.cos(), pitch.sin());
        let height = rng.random_range(0.5..2.5);
        let baseline = rng.random_range(0.05..3.0);
        let translation = random_orthogonal(rng, &down) * baseline;
        Rig {
            down,
            height,
            translation,
        }
    }

    pub fn geometry(&self) -> FramePairGeometry {
        FramePairGeometry::from_parts(nalgebra::Matrix3::identity(), self.translation, DEFAULT_MOTION_FLOOR)
    }

    pub fn context(&self) -> PairContext {
        PairContext {
            geometry: self.geometry(),
            horizon: unit(self.down),
            cam_height: self.height,
            thresholds: ConstraintThresholds::default(),
        }
    }

    pub fn road(&self) -> RoadPlane {
        RoadPlane {
            down: unit(self.down),
            height: self.height,
        }
    }

    /// Signed height of a point above the road (current frame).
    pub fn height_of(&self, x: &Vector3<f64>) -> f64 {
        self.height - x.dot(&self.down)
    }
}

/// How the observed point moved between the two frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Static,
    /// Displacement inside the epipolar plane.
    InPlane,
    /// Arbitrary displacement.
    Free,
}

#[derive(Debug, Clone, Copy)]
pub struct Configuration {
    pub rig: Rig,
    pub point: Vector3<f64>,
    pub moved: Vector3<f64>,
    pub motion: Motion,
    pub p: UnitVector3,
    pub p_cur: UnitVector3,
}

impl Configuration {
    /// Point within 40 m of the current camera at a height between 3 m
    /// below and 4 m above the road.
    pub fn random(rng: &mut impl Rng) -> Self {
        let rig = Rig::random(rng);
        let motion = match rng.random_range(0..3) {
            0 => Motion::Static,
            1 => Motion::InPlane,
            _ => Motion::Free,
        };
        loop {
            let dir = random_unit(rng);
            let point = dir * rng.random_range(1.0..40.0);
            let h = rig.height_of(&point);
            if !(-3.0..4.0).contains(&h) {
                continue;
            }
            let moved = match motion {
                Motion::Static => point,
                Motion::InPlane => {
                    let a = rng.random_range(-2.0..2.0);
                    let b = rng.random_range(-0.3..0.3);
                    point + rig.translation.normalize() * a + point * b
                }
                Motion::Free => point + random_unit(rng) * rng.random_range(0.01..2.0),
            };
            let (Ok(p), Ok(p_cur)) = (
                UnitVector3::from_vector(point - rig.translation),
                UnitVector3::from_vector(moved),
            ) else {
                continue;
            };
            return Configuration {
                rig,
                point,
                moved,
                motion,
                p,
                p_cur,
            };
        }
    }
}

/// A static point of a static world: on the road, or above the cameras
/// where no road constraint applies.
pub fn static_world_point(rng: &mut impl Rng) -> Configuration {
    loop {
        let mut c = Configuration::random(rng);
        let h = c.rig.height_of(&c.point);
        if h < 0.0 || c.motion != Motion::Static {
            continue;
        }
        if h <= c.rig.height {
            c.point += c.rig.down * h;
        }
        let (Ok(p), Ok(p_cur)) = (
            UnitVector3::from_vector(c.point - c.rig.translation),
            UnitVector3::from_vector(c.point),
        ) else {
            continue;
        };
        if p.dot(&p_cur) <= 0.0 {
            continue;
        }
        c.moved = c.point;
        c.p = p;
        c.p_cur = p_cur;
        return c;
    }
}

/// Previous ray, epipolar pole and an in-plane current ray at a random
/// angle, for testing the depth sign against triangulation. With
/// `half_plane` the current ray stays on the feature's side of the baseline,
/// as it does for any point that does not cross the baseline line.
#[derive(Debug, Clone, Copy)]
pub struct PlanarPair {
    pub translation: Vector3<f64>,
    pub p: UnitVector3,
    pub p_cur: UnitVector3,
}

impl PlanarPair {
    pub fn random(rng: &mut impl Rng, half_plane: bool) -> Self {
        let translation = random_unit(rng) * rng.random_range(0.05..3.0);
        let p = random_unit(rng);
        let e = translation.normalize();
        // orthonormal basis of the plane spanned by t and p
        let u = e;
        let v = (p - e * e.dot(&p)).normalize();
        let low = if half_plane { 0.0 } else { -std::f64::consts::PI };
        let phi: f64 = rng.random_range(low..std::f64::consts::PI);
        PlanarPair {
            translation,
            p: unit(p),
            p_cur: unit(u * phi.cos() + v * phi.sin()),
        }
    }
}
