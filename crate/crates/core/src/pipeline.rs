//! Flow files + odometry in, likelihood heatmaps and masks out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::camera::{FisheyeCalibration, PixelPoint};
use crate::constraints::{
    evaluate_correspondence, three_view_deviation, ConstraintDeviations, ConstraintThresholds, PairContext,
    ThreeViewCorrespondence,
};
use crate::error::{Error, Result};
use crate::flow::{average_flow, DenseFlow, FlowGrid, DEFAULT_CELL_SIZE};
use crate::fusion::{render_heatmap, segment, FusionWeights, LikelihoodGrid, SegmentationMask, DEFAULT_THRESHOLD};
use crate::lift::lift_correspondences;
use crate::motion::{camera_motion, FramePairGeometry, Mounting, DEFAULT_MOTION_FLOOR};
use crate::odometry::OdometryLog;
use crate::raster::write_file;

/// Numeric settings of a segmentation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub frame_rate: f64,
    pub cell_size: usize,
    pub threshold: f64,
    pub weights: FusionWeights,
    pub lambda_h: f64,
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub motion_floor: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        let th = ConstraintThresholds::default();
        PipelineSettings {
            frame_rate: 15.0,
            cell_size: DEFAULT_CELL_SIZE,
            threshold: DEFAULT_THRESHOLD,
            weights: FusionWeights::default(),
            lambda_h: th.lambda_height,
            lambda_p: th.lambda_anti_parallel,
            lambda_s: th.lambda_static,
            motion_floor: DEFAULT_MOTION_FLOOR,
        }
    }
}

impl PipelineSettings {
    pub fn thresholds(&self) -> ConstraintThresholds {
        ConstraintThresholds {
            lambda_height: self.lambda_h,
            lambda_anti_parallel: self.lambda_p,
            lambda_static: self.lambda_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return bad(format!("frame_rate = {} must be > 0", self.frame_rate));
        }
        if self.cell_size == 0 {
            return bad("cell_size must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold = {} must lie in [0, 1]", self.threshold));
        }
        for (name, v) in [
            ("lambda_h", self.lambda_h),
            ("lambda_p", self.lambda_p),
            ("lambda_s", self.lambda_s),
            ("motion_floor", self.motion_floor),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        FusionWeights::try_from(self.weights.as_array())?;
        Ok(())
    }

    /// Timestamp of frame `k`.
    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate
    }
}

/// On-disk run configuration. Relative paths are resolved against the
/// directory holding the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub calibration: PathBuf,
    pub mounting: PathBuf,
    pub flow_dir: PathBuf,
    pub odometry: PathBuf,
    pub output_dir: PathBuf,
    #[serde(flatten)]
    pub settings: PipelineSettings,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PipelineConfig {
    /// Configuration for the standard dataset layout.
    pub fn for_dataset() -> Self {
        PipelineConfig {
            calibration: "calibration.toml".into(),
            mounting: "mounting.toml".into(),
            flow_dir: "flow".into(),
            odometry: "odometry.txt".into(),
            output_dir: "segmentation".into(),
            settings: PipelineSettings::default(),
            base_dir: PathBuf::new(),
        }
    }

    const KEYS: [&'static str; 13] = [
        "calibration",
        "mounting",
        "flow_dir",
        "odometry",
        "output_dir",
        "frame_rate",
        "cell_size",
        "threshold",
        "weights",
        "lambda_h",
        "lambda_p",
        "lambda_s",
        "motion_floor",
    ];

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let invalid = |m: String| Error::InvalidParameter(format!("pipeline config: {m}"));
        // flattened settings rule out serde's own unknown-field check
        let table: toml::Table = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if let Some(key) = table.keys().find(|k| !Self::KEYS.contains(&k.as_str())) {
            return Err(invalid(format!("unknown field `{key}`")));
        }
        let mut config: PipelineConfig = table.try_into().map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.settings.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Hex SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks that every referenced input exists.
    pub fn check_inputs(&self) -> Result<()> {
        self.settings.validate()?;
        for (name, path) in [
            ("calibration", &self.calibration),
            ("mounting", &self.mounting),
            ("odometry", &self.odometry),
        ] {
            let full = self.resolve(path);
            if !full.is_file() {
                return Err(Error::InvalidParameter(format!("{name} file {} does not exist", full.display())));
            }
        }
        let flow = self.resolve(&self.flow_dir);
        if !flow.is_dir() {
            return Err(Error::InvalidParameter(format!("flow directory {} does not exist", flow.display())));
        }
        Ok(())
    }
}

pub fn flow_file_name(pair: usize) -> String {
    format!("flow_{pair:06}.smfl")
}

pub fn mask_file_name(pair: usize) -> String {
    format!("mask_{pair:06}.pgm")
}

pub fn heatmap_file_name(pair: usize) -> String {
    format!("heatmap_{pair:06}.pgm")
}

pub fn likelihood_file_name(pair: usize) -> String {
    format!("likelihood_{pair:06}.smlg")
}

/// Parses the pair index out of `<prefix>NNNNNN.<ext>`.
pub fn parse_indexed_name(name: &str, prefix: &str, extension: &str) -> Option<usize> {
    let stem = name.strip_prefix(prefix)?.strip_suffix(extension)?.strip_suffix('.')?;
    (!stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit())).then(|| stem.parse().ok())?
}

/// Indexed files in `dir`, sorted by index.
pub fn list_indexed(dir: &Path, prefix: &str, extension: &str) -> Result<BTreeMap<usize, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(index) = entry.file_name().to_str().and_then(|n| parse_indexed_name(n, prefix, extension)) {
            out.insert(index, entry.path());
        }
    }
    Ok(out)
}

/// Result of one frame pair.
#[derive(Debug, Clone)]
pub struct FrameResult {
    pub index: usize,
    pub geometry: FramePairGeometry,
    /// Row-major per cell; `None` for cells without a usable correspondence.
    pub deviations: Vec<Option<ConstraintDeviations>>,
    pub likelihood: LikelihoodGrid,
    pub mask: SegmentationMask,
    pub valid_cells: usize,
    /// Cells whose correspondence left the field of view.
    pub dropped: usize,
}

/// Loaded inputs of a run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub calibration: FisheyeCalibration,
    pub mounting: Mounting,
    pub odometry: OdometryLog,
    pub settings: PipelineSettings,
}

impl Pipeline {
    pub fn new(
        calibration: FisheyeCalibration,
        mounting: Mounting,
        odometry: OdometryLog,
        settings: PipelineSettings,
    ) -> Result<Self> {
        settings.validate()?;
        Ok(Pipeline {
            calibration,
            mounting,
            odometry,
            settings,
        })
    }

    pub fn from_config(config: &PipelineConfig) -> Result<Self> {
        config.check_inputs()?;
        Self::new(
            FisheyeCalibration::load(&config.resolve(&config.calibration))?,
            Mounting::load(&config.resolve(&config.mounting))?,
            OdometryLog::load(&config.resolve(&config.odometry))?,
            config.settings,
        )
    }

    fn image_size(&self) -> (usize, usize) {
        let (w, h) = self.calibration.image_size();
        (w as usize, h as usize)
    }

    /// Camera motion over the pair `(k - 1, k)` from the odometry log.
    pub fn geometry(&self, k: usize) -> Result<FramePairGeometry> {
        if k == 0 {
            return Err(Error::InvalidParameter("pair indices start at 1".into()));
        }
        let s = &self.settings;
        let delta = self.odometry.dead_reckon(s.time_of(k - 1), s.time_of(k))?;
        Ok(camera_motion(&delta, &self.mounting, s.motion_floor))
    }

    pub fn average(&self, flow: &DenseFlow) -> Result<FlowGrid> {
        average_flow(flow, self.settings.cell_size, self.image_size())
    }

    /// Evaluates the pair `(k - 1, k)`. `next` is the cell grid of the pair
    /// `(k, k + 1)`, used for the three-view constraint when it carries
    /// weight.
    pub fn process(&self, k: usize, grid: &FlowGrid, next: Option<&FlowGrid>) -> Result<FrameResult> {
        let geometry = self.geometry(k)?;
        let s = &self.settings;
        let ctx = PairContext {
            geometry,
            horizon: self.calibration.horizon_vector(),
            cam_height: self.calibration.cam_height(),
            thresholds: s.thresholds(),
        };
        let next_geometry = match next {
            Some(_) if s.weights.as_array()[4] > 0.0 => self.geometry(k + 1).ok(),
            _ => None,
        };
        let lifted = lift_correspondences(grid, &self.calibration, &geometry);
        let mut deviations: Vec<Option<ConstraintDeviations>> = vec![None; grid.len()];
        let evaluated: Vec<(usize, ConstraintDeviations)> = lifted
            .correspondences
            .par_iter()
            .map(|c| {
                let mut dev = evaluate_correspondence(&c.p, &c.p_cur, &ctx);
                if let (Some(next), Some(next_geometry)) = (next, next_geometry.as_ref()) {
                    dev.three_view = self.three_view(grid, c.cell, c, next, &geometry, next_geometry);
                }
                (c.cell, dev)
            })
            .collect();
        for (cell, dev) in evaluated {
            deviations[cell] = Some(dev);
        }
        let likelihood = LikelihoodGrid::from_deviations(
            grid.cols(),
            grid.rows(),
            grid.cell_size(),
            grid.image_size(),
            &deviations,
            &s.weights,
        )?;
        let mask = segment(&likelihood, s.threshold)?;
        Ok(FrameResult {
            index: k,
            geometry,
            deviations,
            likelihood,
            mask,
            valid_cells: grid.valid_count(),
            dropped: lifted.dropped,
        })
    }

    /// Follows the cell into the next pair: its end point is looked up in the
    /// next grid (nearest cell) to obtain the third ray.
    fn three_view(
        &self,
        grid: &FlowGrid,
        cell: usize,
        c: &crate::lift::SphericalCorrespondence,
        next: &FlowGrid,
        geometry: &FramePairGeometry,
        next_geometry: &FramePairGeometry,
    ) -> Option<f64> {
        let (col, row) = grid.col_row(cell);
        let start = grid.cell_center(col, row);
        let [du, dv] = grid.cell(cell)?;
        let mid = PixelPoint::new(start.u + du, start.v + dv);
        let (w, h) = next.image_size();
        let (x, y) = (mid.u.round(), mid.v.round());
        if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 {
            return None;
        }
        let cs = next.cell_size();
        let [du2, dv2] = next.get(x as usize / cs, y as usize / cs)?;
        let last = self.calibration.unproject(PixelPoint::new(mid.u + du2, mid.v + dv2)).ok()?;
        let track = ThreeViewCorrespondence::from_views(&c.p_raw, &c.p_cur, &last, geometry, next_geometry).ok()?;
        three_view_deviation(&track, self.settings.motion_floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub valid_cells: usize,
    pub dropped: usize,
    pub moving_cells: usize,
    pub static_camera: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFrame {
    pub index: usize,
    pub reason: String,
}

/// Summary of a segmentation run, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub settings: PipelineSettings,
    pub frames: Vec<FrameRecord>,
    pub skipped: Vec<SkippedFrame>,
    pub total_dropped: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn load_grid(pipeline: &Pipeline, path: &Path) -> Result<FlowGrid> {
    pipeline.average(&DenseFlow::load(path)?)
}

/// Runs the whole dataset referenced by `config` and writes one heatmap,
/// mask and likelihood grid per frame pair plus the manifest. Frames whose
/// inputs are unusable are skipped and listed in the manifest.
pub fn segment_dataset(config: &PipelineConfig) -> Result<Manifest> {
    let pipeline = Pipeline::from_config(config)?;
    let flows = list_indexed(&config.resolve(&config.flow_dir), "flow_", "smfl")?;
    let out_dir = config.output_path();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let three_view = pipeline.settings.weights.as_array()[4] > 0.0;

    let indices: Vec<usize> = flows.keys().copied().collect();
    let outcomes: Vec<std::result::Result<FrameRecord, SkippedFrame>> = indices
        .par_iter()
        .map(|&k| {
            let skip = |e: Error| SkippedFrame {
                index: k,
                reason: e.to_string(),
            };
            if k == 0 {
                return Err(skip(Error::InvalidParameter("pair index 0 has no previous frame".into())));
            }
            let grid = load_grid(&pipeline, &flows[&k]).map_err(skip)?;
            let next = match (three_view, flows.get(&(k + 1))) {
                (true, Some(path)) => load_grid(&pipeline, path).ok(),
                _ => None,
            };
            let result = pipeline.process(k, &grid, next.as_ref()).map_err(skip)?;
            write_frame(&out_dir, &result).map_err(skip)?;
            Ok(FrameRecord {
                index: k,
                valid_cells: result.valid_cells,
                dropped: result.dropped,
                moving_cells: result.mask.moving_cells(),
                static_camera: result.geometry.degenerate,
            })
        })
        .collect();

    let mut frames = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(f) => frames.push(f),
            Err(s) => skipped.push(s),
        }
    }
    let manifest = Manifest {
        config_hash: config.hash(),
        settings: config.settings,
        total_dropped: frames.iter().map(|f| f.dropped).sum(),
        frames,
        skipped,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&path, |w| std::io::Write::write_all(w, text.as_bytes()))?;
    Ok(manifest)
}

fn write_frame(dir: &Path, result: &FrameResult) -> Result<()> {
    let k = result.index;
    render_heatmap(&result.likelihood).save(&dir.join(heatmap_file_name(k)))?;
    result.mask.to_image().save(&dir.join(mask_file_name(k)))?;
    result.likelihood.to_scalar_grid().save(&dir.join(likelihood_file_name(k)))
}
