use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero or non-finite vector cannot be normalized")]
    ZeroVector,

    #[error("angle {0} rad outside the calibrated domain")]
    AngleOutOfDomain(f64),

    #[error("point outside the field of view: {0}")]
    OutOfFov(String),

    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),

    #[error("invalid mounting: {0}")]
    InvalidMounting(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("odometry: {0}")]
    Odometry(String),

    #[error("projection onto the epipolar plane is undefined (point at the plane pole)")]
    UndefinedProjection,

    #[error("camera centre coincides with the reprojected road point")]
    DegenerateReprojection,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("simulation produced no visible points")]
    EmptyScene,

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no frames in common between masks and ground truth")]
    NoOverlap,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
