//! Motion likelihood fusion, thresholding and rendering.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintDeviations;
use crate::error::{Error, Result};
use crate::raster::{GrayImage, ScalarGrid};

/// Likelihood at which the heatmap saturates.
pub const HEATMAP_SATURATION: f64 = 0.02;
/// Default segmentation threshold on the fused likelihood.
pub const DEFAULT_THRESHOLD: f64 = 6e-4;

/// Non-negative weights of the five constraint deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct FusionWeights([f64; 5]);

impl FusionWeights {
    pub fn new(epipolar: f64, depth: f64, height: f64, anti_parallel: f64, three_view: f64) -> Result<Self> {
        Self::try_from([epipolar, depth, height, anti_parallel, three_view])
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.0
    }

    /// All weights multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::try_from(self.0.map(|w| w * k))
    }
}

impl Default for FusionWeights {
    fn default() -> Self {
        FusionWeights([1.0, 1.0, 0.2, 0.2, 0.0])
    }
}

impl TryFrom<[f64; 5]> for FusionWeights {
    type Error = Error;

    fn try_from(w: [f64; 5]) -> Result<Self> {
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "fusion weights must be finite and non-negative, got {w:?}"
            )));
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("at least one fusion weight must be positive".into()));
        }
        Ok(FusionWeights(w))
    }
}

impl From<FusionWeights> for [f64; 5] {
    fn from(w: FusionWeights) -> Self {
        w.0
    }
}

/// Parses `e,d,h,p,3v`.
impl FromStr for FusionWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values: Vec<f64> = s
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidParameter(format!("weights {s:?}: {e}")))?;
        let array: [f64; 5] = values
            .try_into()
            .map_err(|v: Vec<f64>| Error::InvalidParameter(format!("expected 5 weights, got {}", v.len())))?;
        Self::try_from(array)
    }
}

impl fmt::Display for FusionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [e, d, h, p, v] = self.0;
        write!(f, "{e},{d},{h},{p},{v}")
    }
}

/// The constraint that produced a deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Epipolar,
    Depth,
    Height,
    AntiParallel,
    ThreeView,
    StaticCamera,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Epipolar,
        Component::Depth,
        Component::Height,
        Component::AntiParallel,
        Component::ThreeView,
        Component::StaticCamera,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Epipolar => "epipolar",
            Component::Depth => "depth",
            Component::Height => "height",
            Component::AntiParallel => "anti_parallel",
            Component::ThreeView => "three_view",
            Component::StaticCamera => "static_camera",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Weighted mean of the applicable deviations. A static-camera deviation is
/// returned unchanged. `None` when nothing with positive weight applies.
pub fn fuse(dev: &ConstraintDeviations, weights: &FusionWeights) -> Option<f64> {
    if let Some(xi) = dev.static_camera {
        return Some(xi);
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (xi, w) in dev.components().into_iter().zip(weights.0) {
        if let (Some(xi), true) = (xi, w > 0.0) {
            numerator += w * xi;
            denominator += w;
        }
    }
    (denominator > 0.0).then(|| (numerator / denominator).clamp(0.0, 1.0))
}

/// Weighted contribution `μ_i ξ_i` of every component, indexed like
/// [`Component::ALL`].
pub fn contributions(dev: &ConstraintDeviations, weights: &FusionWeights) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, (xi, w)) in dev.components().into_iter().zip(weights.0).enumerate() {
        out[i] = xi.map_or(0.0, |xi| w * xi);
    }
    out[5] = dev.static_camera.unwrap_or(0.0);
    out
}

/// Per-cell fused likelihood over the flow-cell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodGrid {
    cols: usize,
    rows: usize,
    cell_size: usize,
    image_size: (usize, usize),
    values: Vec<Option<f64>>,
}

impl LikelihoodGrid {
    pub fn new(cols: usize, rows: usize, cell_size: usize, image_size: (usize, usize)) -> Self {
        LikelihoodGrid {
            cols,
            rows,
            cell_size,
            image_size,
            values: vec![None; cols * rows],
        }
    }

    /// Fuses per-cell deviations (row-major, one entry per cell).
    pub fn from_deviations(
        cols: usize,
        rows: usize,
        cell_size: usize,
        image_size: (usize, usize),
        deviations: &[Option<ConstraintDeviations>],
        weights: &FusionWeights,
    ) -> Result<Self> {
        if deviations.len() != cols * rows {
            return Err(Error::DimensionMismatch {
                expected: (cols, rows),
                actual: (deviations.len(), 1),
            });
        }
        let values = deviations
            .par_iter()
            .map(|d| d.as_ref().and_then(|d| fuse(d, weights)))
            .collect();
        Ok(LikelihoodGrid {
            cols,
            rows,
            cell_size,
            image_size,
            values,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    pub fn image_size(&self) -> (usize, usize) {
        self.image_size
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: Option<f64>) {
        self.values[row * self.cols + col] = value;
    }

    pub fn to_scalar_grid(&self) -> ScalarGrid {
        ScalarGrid::from_values(self.cols, self.rows, self.values.iter().copied())
    }
}

/// Per-cell moving/static decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    cols: usize,
    rows: usize,
    cell_size: usize,
    image_size: (usize, usize),
    moving: Vec<bool>,
    threshold: f64,
}

impl SegmentationMask {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_moving(&self, col: usize, row: usize) -> bool {
        self.moving[row * self.cols + col]
    }

    pub fn moving_cells(&self) -> usize {
        self.moving.iter().filter(|&&m| m).count()
    }

    /// Pixel mask: 255 over moving cells, 0 elsewhere.
    pub fn to_image(&self) -> GrayImage {
        let (w, h) = self.image_size;
        let cell = self.cell_size;
        GrayImage::from_fn(w, h, |x, y| {
            let (col, row) = (x / cell, y / cell);
            if col < self.cols && row < self.rows && self.is_moving(col, row) {
                255
            } else {
                0
            }
        })
    }
}

/// Strict `ξ > threshold`; cells without a likelihood are static.
pub fn segment(grid: &LikelihoodGrid, threshold: f64) -> Result<SegmentationMask> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(SegmentationMask {
        cols: grid.cols,
        rows: grid.rows,
        cell_size: grid.cell_size,
        image_size: grid.image_size,
        moving: grid.values.iter().map(|v| v.is_some_and(|xi| xi > threshold)).collect(),
        threshold,
    })
}

/// Gray level of a likelihood: linear on [0, 0.02], rounded half up.
pub fn heat_level(xi: Option<f64>) -> u8 {
    match xi {
        Some(xi) if xi > 0.0 => (xi / HEATMAP_SATURATION * 255.0 + 0.5).floor().min(255.0) as u8,
        _ => 0,
    }
}

/// Heatmap image with each cell's level replicated over its pixel block.
pub fn render_heatmap(grid: &LikelihoodGrid) -> GrayImage {
    let (w, h) = grid.image_size;
    let cell = grid.cell_size;
    GrayImage::from_fn(w, h, |x, y| {
        let (col, row) = (x / cell, y / cell);
        if col < grid.cols && row < grid.rows {
            heat_level(grid.get(col, row))
        } else {
            0
        }
    })
}
