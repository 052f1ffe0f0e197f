use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::{FisheyeCalibration, PixelPoint};
use crate::error::{Error, Result};
use crate::flow::{DenseFlow, FlowGrid, DEFAULT_CELL_SIZE};
use crate::motion::{CameraPose, FramePairGeometry, Mounting};
use crate::odometry::{OdometryLog, OdometrySample, PlanarDelta};
use crate::polygon::{convex_hull, Polygon};
use crate::sim::scene::{ObjectClass, SceneSpec};
use crate::sphere::UnitVector3;

/// Samples per cuboid edge when tracing object outlines.
const OUTLINE_SAMPLES: usize = 24;

/// What a viewing ray hit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum Surface {
    Road,
    Structure(usize),
    Object(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub surface: Surface,
    /// World point at the time of the casting frame.
    pub point: Vector3<f64>,
    /// World velocity of the surface, m/s.
    pub velocity: Vector3<f64>,
}

impl Hit {
    pub fn position_after(&self, dt: f64) -> Vector3<f64> {
        self.point + self.velocity * dt
    }
}

/// Exact correspondence of one flow cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTruth {
    pub surface: Surface,
    pub flow: [f64; 2],
}

/// One ground-truth record per object and frame pair. Positions refer to
/// the earlier frame of the pair, in whose image the flow is anchored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    /// Index `k` of the pair `(k - 1, k)`.
    pub frame: usize,
    pub object_id: u32,
    pub class: ObjectClass,
    pub moving: bool,
    /// Horizontal camera-to-centroid distance, metres.
    pub distance: f64,
    /// Centroid ahead of the camera along the vehicle heading, metres.
    pub forward: f64,
    /// Centroid to the left of the camera, metres.
    pub left: f64,
    /// Flow cells whose ray hits the object.
    pub visible_cells: usize,
    #[serde(skip)]
    pub polygon: Polygon,
}

/// Flow and ground truth of one frame pair.
#[derive(Debug, Clone)]
pub struct SimulatedPair {
    pub index: usize,
    pub flow: DenseFlow,
    /// Row-major over the flow cells; `None` where no correspondence exists.
    pub cells: Vec<Option<CellTruth>>,
    pub objects: Vec<ObjectTruth>,
}

/// Ray caster over a [`SceneSpec`].
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: SceneSpec,
    calibration: FisheyeCalibration,
    mounting: Mounting,
    vehicle: Vec<PlanarDelta>,
    poses: Vec<CameraPose>,
    seed: u64,
    cell_size: usize,
}

impl Simulator {
    pub fn new(spec: SceneSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let calibration = spec.calibration()?;
        let mounting = spec.mounting()?;
        let vehicle: Vec<PlanarDelta> = (0..spec.frames)
            .map(|k| PlanarDelta::ZERO.advance(spec.host.speed, spec.host.yaw_rate, spec.time_of(k)))
            .collect();
        let poses = vehicle.iter().map(|v| mounting.camera_pose(v)).collect();
        Ok(Simulator {
            spec,
            calibration,
            mounting,
            vehicle,
            poses,
            seed,
            cell_size: DEFAULT_CELL_SIZE,
        })
    }

    pub fn with_cell_size(mut self, cell_size: usize) -> Self {
        self.cell_size = cell_size.max(1);
        self
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn calibration(&self) -> &FisheyeCalibration {
        &self.calibration
    }

    pub fn mounting(&self) -> &Mounting {
        &self.mounting
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    /// Number of frame pairs, indexed `1..=pairs()`.
    pub fn pairs(&self) -> usize {
        self.spec.frames - 1
    }

    pub fn camera_pose(&self, frame: usize) -> &CameraPose {
        &self.poses[frame]
    }

    /// Wheel-speed log sampled at the frame times.
    pub fn odometry(&self) -> OdometryLog {
        let samples = (0..self.spec.frames)
            .map(|k| OdometrySample {
                timestamp: self.spec.time_of(k),
                wheel_speed: self.spec.host.speed,
                yaw_rate: self.spec.host.yaw_rate,
            })
            .collect();
        OdometryLog::new(samples).expect("frame times increase")
    }

    /// Relative geometry of the pair `(k - 1, k)`.
    pub fn pair_geometry(&self, k: usize, motion_floor: f64) -> FramePairGeometry {
        FramePairGeometry::between(&self.poses[k - 1], &self.poses[k], motion_floor)
    }

    fn image_size(&self) -> (usize, usize) {
        let (w, h) = self.calibration.image_size();
        (w as usize, h as usize)
    }

    pub fn flow_grid_shape(&self) -> FlowGrid {
        let (w, h) = self.image_size();
        FlowGrid::empty(w, h, self.cell_size)
    }

    /// Casts the ray through `pixel` in `frame` into the scene.
    pub fn cast(&self, frame: usize, pixel: PixelPoint) -> Option<Hit> {
        let ray = self.calibration.unproject(pixel).ok()?;
        let pose = &self.poses[frame];
        let origin = pose.center;
        let dir = pose.world_from_camera * ray.into_vector();
        let time = self.spec.time_of(frame);

        let mut best: Option<(f64, Surface, Vector3<f64>)> = None;
        let mut consider = |s: f64, surface: Surface, velocity: Vector3<f64>| {
            if best.is_none_or(|(b, _, _)| s < b) {
                best = Some((s, surface, velocity));
            }
        };
        if dir.z < 0.0 {
            let s = -origin.z / dir.z;
            let hit = origin + dir * s;
            if (hit - origin).xy().norm() <= self.spec.road_extent {
                consider(s, Surface::Road, Vector3::zeros());
            }
        }
        for (i, c) in self.spec.structures.iter().enumerate() {
            if let Some(s) = c.intersect(&origin, &dir) {
                consider(s, Surface::Structure(i), Vector3::zeros());
            }
        }
        for o in &self.spec.objects {
            if let Some(s) = o.at(time).intersect(&origin, &dir) {
                consider(s, Surface::Object(o.id), o.velocity());
            }
        }
        best.map(|(s, surface, velocity)| Hit {
            surface,
            point: origin + dir * s,
            velocity,
        })
    }

    /// Camera ray towards a world point, if it lies inside the field of view.
    pub fn ray_to(&self, frame: usize, world: &Vector3<f64>) -> Option<UnitVector3> {
        let ray = UnitVector3::from_vector(self.poses[frame].to_camera(world)).ok()?;
        (ray.z().clamp(-1.0, 1.0).acos() <= self.calibration.theta_max()).then_some(ray)
    }

    /// Exact flow of the cell centred at `pixel` over the pair `(k - 1, k)`.
    fn correspondence(&self, k: usize, pixel: PixelPoint) -> Option<CellTruth> {
        let hit = self.cast(k - 1, pixel)?;
        let dt = self.spec.time_of(k) - self.spec.time_of(k - 1);
        // both ends reprojected so that unchanged rays give exactly zero flow
        let start = self.calibration.project(&self.ray_to(k - 1, &hit.point)?).ok()?;
        let end = self.calibration.project(&self.ray_to(k, &hit.position_after(dt))?).ok()?;
        debug_assert!((start.u - pixel.u).hypot(start.v - pixel.v) < 1e-6);
        Some(CellTruth {
            surface: hit.surface,
            flow: [end.u - start.u, end.v - start.v],
        })
    }

    /// Exact per-cell correspondences for the pair `(k - 1, k)`.
    pub fn cell_truth(&self, k: usize) -> Vec<Option<CellTruth>> {
        let grid = self.flow_grid_shape();
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (col, row) = grid.col_row(i);
                self.correspondence(k, grid.cell_center(col, row))
            })
            .collect()
    }

    /// Simulates the pair `(k - 1, k)` for `1 <= k <= pairs()`.
    pub fn simulate_pair(&self, k: usize) -> Result<SimulatedPair> {
        if k == 0 || k > self.pairs() {
            return Err(Error::InvalidParameter(format!("pair index {k} outside 1..={}", self.pairs())));
        }
        let grid = self.flow_grid_shape();
        let cells = self.cell_truth(k);
        if cells.iter().all(Option::is_none) {
            return Err(Error::EmptyScene);
        }
        let (w, h) = self.image_size();
        let cs = self.cell_size;
        let mut flow = DenseFlow::from_fn(w, h, |x, y| {
            cells[grid.index_of(x / cs, y / cs)].map(|c| c.flow)
        });
        if self.spec.noise_sigma > 0.0 {
            let normal = Normal::new(0.0, self.spec.noise_sigma)
                .map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(k as u64);
            for y in 0..h {
                for x in 0..w {
                    if let Some([du, dv]) = flow.get(x, y) {
                        let (nu, nv) = (normal.sample(&mut rng), normal.sample(&mut rng));
                        flow.set(x, y, Some([du + nu, dv + nv]));
                    }
                }
            }
        }
        let objects = self.object_truth(k, &cells);
        Ok(SimulatedPair {
            index: k,
            flow,
            cells,
            objects,
        })
    }

    fn object_truth(&self, k: usize, cells: &[Option<CellTruth>]) -> Vec<ObjectTruth> {
        let anchor = k - 1;
        let time = self.spec.time_of(anchor);
        let pose = &self.poses[anchor];
        let heading = self.vehicle[anchor].dpsi;
        self.spec
            .objects
            .iter()
            .map(|o| {
                let shape = o.at(time);
                let offset = (shape.center() - pose.center).xy();
                let (s, c) = heading.sin_cos();
                let outline: Vec<PixelPoint> = shape
                    .edge_samples(OUTLINE_SAMPLES)
                    .iter()
                    .filter_map(|x| self.ray_to(anchor, x))
                    .filter_map(|ray| self.calibration.project(&ray).ok())
                    .collect();
                ObjectTruth {
                    frame: k,
                    object_id: o.id,
                    class: o.class,
                    moving: o.is_moving(),
                    distance: offset.norm(),
                    forward: c * offset.x + s * offset.y,
                    left: -s * offset.x + c * offset.y,
                    visible_cells: cells
                        .iter()
                        .flatten()
                        .filter(|t| t.surface == Surface::Object(o.id))
                        .count(),
                    polygon: convex_hull(&outline),
                }
            })
            .collect()
    }
}
