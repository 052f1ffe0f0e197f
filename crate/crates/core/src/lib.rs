//! Motion segmentation for fisheye cameras on a moving vehicle.
//!
//! Dense optical flow is averaged over small cells, lifted onto the unit
//! sphere and compared with the motion predicted by wheel odometry. Flow that
//! no static scene point could produce is flagged as moving.

pub mod camera;
pub mod constraints;
pub mod error;
pub mod eval;
pub mod flow;
pub mod fusion;
pub mod lift;
pub mod motion;
pub mod odometry;
pub mod pipeline;
pub mod polygon;
pub mod raster;
pub mod sim;
pub mod sphere;

pub use camera::{FisheyeCalibration, PixelPoint};
pub use constraints::{ConstraintDeviations, ConstraintThresholds};
pub use error::{Error, Result};
pub use flow::{DenseFlow, FlowGrid};
pub use fusion::{FusionWeights, LikelihoodGrid, SegmentationMask};
pub use motion::{FramePairGeometry, Mounting};
pub use odometry::{OdometryLog, OdometrySample, PlanarDelta};
pub use pipeline::{Pipeline, PipelineConfig, PipelineSettings};
pub use sphere::UnitVector3;
