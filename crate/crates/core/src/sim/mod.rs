//! Synthetic fisheye scenes with exact flow and ground truth.
//!
//! Scenes consist of the road plane, static boxes and boxes moving at
//! constant velocity. Each flow cell is ray-cast at its centre in the earlier
//! frame of a pair; the hit point is moved with its surface and projected
//! into the later frame. Every pixel of the cell carries that exact flow, so
//! cell averaging reproduces it.

mod dataset;
mod oracle;
mod presets;
mod scene;
mod simulator;

pub use dataset::{polygon_line, write_dataset, DatasetSummary, CONFIG_FILE, GROUND_TRUTH_FILE, POLYGONS_FILE, SCENE_FILE};
pub use oracle::{oracle_classify, OracleLabel, RoadPlane, EPIPOLAR_TOLERANCE, HEIGHT_TOLERANCE};
pub use presets::{background, preset, Preset, CAMERA_PITCH_DEG, CAMERA_POSITION, PRESET_FRAMES};
pub use scene::{Cuboid, HostMotion, Lens, ObjectClass, SceneObject, SceneSpec, DEFAULT_FRAME_RATE, DEFAULT_ROAD_EXTENT};
pub use simulator::{CellTruth, Hit, ObjectTruth, SimulatedPair, Simulator, Surface};
