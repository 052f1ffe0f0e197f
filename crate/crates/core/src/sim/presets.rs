//! Canonical scenes, one per motion class.
//!
//! All presets share the lens, a forward camera 2 m ahead of the rear axle
//! at 1 m height pitched 10° down, 15 fps and 41 frames (40 flow pairs).
//! The host drives along +x from the origin. Backgrounds hold only the road
//! and structures above camera height, so nothing static stands on the road
//! below the horizon.
//!
//! | preset          | host        | object                                          |
//! |-----------------|-------------|-------------------------------------------------|
//! | crossing        | 1.5 m/s     | pedestrian 7 m ahead walking right at 1.5 m/s,  |
//! |                 |             | starting on the centre line                     |
//! | overtaking      | 5 m/s       | car in the left lane at 8 m/s, starting beside  |
//! | preceding       | 8 m/s       | car 4.5 m ahead in the same lane at 7.5 m/s     |
//! | approaching     | 1.5 m/s     | oncoming car in the left lane at 1.5 m/s        |
//! | static-ego      | standing    | pedestrian 4 m ahead walking right at 1.2 m/s   |
//! | static-world    | 5 m/s, turn | none                                            |
//! | static-obstacle | 5 m/s       | parked car 6 m ahead in the left lane           |

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::motion::Mounting;
use crate::sim::scene::{
    Cuboid, HostMotion, Lens, ObjectClass, SceneObject, SceneSpec, DEFAULT_FRAME_RATE, DEFAULT_ROAD_EXTENT,
};

pub const PRESET_FRAMES: usize = 41;
pub const CAMERA_POSITION: [f64; 3] = [2.0, 0.0, 1.0];
pub const CAMERA_PITCH_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Crossing,
    Overtaking,
    Preceding,
    Approaching,
    StaticEgo,
    StaticWorld,
    StaticObstacle,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Crossing,
        Preset::Overtaking,
        Preset::Preceding,
        Preset::Approaching,
        Preset::StaticEgo,
        Preset::StaticWorld,
        Preset::StaticObstacle,
    ];

    /// The five presets with a single moving object.
    pub const MOVING: [Preset; 5] = [
        Preset::Crossing,
        Preset::Overtaking,
        Preset::Preceding,
        Preset::Approaching,
        Preset::StaticEgo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Crossing => "crossing",
            Preset::Overtaking => "overtaking",
            Preset::Preceding => "preceding",
            Preset::Approaching => "approaching",
            Preset::StaticEgo => "static-ego",
            Preset::StaticWorld => "static-world",
            Preset::StaticObstacle => "static-obstacle",
        }
    }

    pub fn spec(&self) -> SceneSpec {
        preset(*self)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_owned()))
    }
}

fn camera_x() -> f64 {
    CAMERA_POSITION[0]
}

fn pedestrian(id: u32, class: ObjectClass, ahead: f64, left: f64, speed_left: f64) -> SceneObject {
    SceneObject {
        id,
        class,
        shape: Cuboid::on_ground(camera_x() + ahead, left, 0.0, 0.5, 0.5, 1.8),
        velocity: [0.0, speed_left, 0.0],
    }
}

/// Passenger car centred `ahead` metres in front of the camera.
fn car(id: u32, class: ObjectClass, ahead: f64, left: f64, speed: f64) -> SceneObject {
    SceneObject {
        id,
        class,
        shape: Cuboid::on_ground(camera_x() + ahead, left, 0.2, 4.5, 1.8, 1.3),
        velocity: [speed, 0.0, 0.0],
    }
}

/// Static background: sign gantries across the road and elevated blocks
/// along both sides, all with their lowest face above the camera.
pub fn background() -> Vec<Cuboid> {
    let mut out = Vec::new();
    for x in [22.0, 45.0, 70.0] {
        out.push(Cuboid {
            min: [x, -9.0, 5.0],
            max: [x + 1.0, 9.0, 6.5],
        });
    }
    for side in [-1.0, 1.0] {
        for (x0, x1, z0) in [(-10.0, 15.0, 2.5), (18.0, 40.0, 3.0), (44.0, 90.0, 2.2)] {
            let (y0, y1): (f64, f64) = (9.0 * side, 22.0 * side);
            out.push(Cuboid {
                min: [x0, y0.min(y1), z0],
                max: [x1, y0.max(y1), z0 + 10.0],
            });
        }
    }
    out
}

fn base(name: &str, speed: f64, yaw_rate: f64, objects: Vec<SceneObject>) -> SceneSpec {
    SceneSpec {
        name: name.to_owned(),
        frame_rate: DEFAULT_FRAME_RATE,
        frames: PRESET_FRAMES,
        noise_sigma: 0.0,
        road_extent: DEFAULT_ROAD_EXTENT,
        lens: Lens::default(),
        mounting: Mounting::forward_facing(Vector3::from(CAMERA_POSITION), CAMERA_PITCH_DEG.to_radians()).to_file(),
        host: HostMotion { speed, yaw_rate },
        structures: background(),
        objects,
    }
}

pub fn preset(p: Preset) -> SceneSpec {
    use ObjectClass as C;
    match p {
        Preset::Crossing => base(p.name(), 1.5, 0.0, vec![pedestrian(1, C::Crossing, 7.0, 0.0, -1.5)]),
        Preset::Overtaking => base(p.name(), 5.0, 0.0, vec![car(1, C::Overtaking, -1.0, 3.0, 8.0)]),
        Preset::Preceding => base(p.name(), 8.0, 0.0, vec![car(1, C::Preceding, 6.75, 0.0, 7.5)]),
        Preset::Approaching => base(p.name(), 1.5, 0.0, vec![car(1, C::Approaching, 7.2, 3.0, -1.5)]),
        Preset::StaticEgo => base(p.name(), 0.0, 0.0, vec![pedestrian(1, C::StaticEgo, 4.0, 1.5, -1.2)]),
        Preset::StaticWorld => base(p.name(), 5.0, 0.1, vec![]),
        Preset::StaticObstacle => base(p.name(), 5.0, 0.0, vec![car(1, C::Parked, 6.0, 3.0, 0.0)]),
    }
}
