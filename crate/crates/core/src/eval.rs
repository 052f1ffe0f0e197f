//! Scoring segmentation masks against ground-truth polygons.
//!
//! A mask pixel is any non-zero pixel. Polygons are filled at pixel centres
//! with the even-odd rule. For each moving object in range:
//!
//! * `tp` mask pixels inside its polygon, `fn` polygon pixels outside the mask;
//! * `fp` mask pixels outside every moving object's polygon (shared by all
//!   objects of the frame);
//! * `tpr = tp / (tp + fn)`, `iou = tp / (tp + fp + fn)`, detected iff `tp > 0`.
//!
//! A pixel inside two polygons counts for both objects.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::PixelPoint;
use crate::error::{Error, Result};
use crate::pipeline::list_indexed;
use crate::polygon::Polygon;
use crate::raster::{write_file, GrayImage, ScalarGrid};
use crate::sim::{ObjectClass, ObjectTruth};

pub const DEFAULT_RANGE_GATE: f64 = 8.0;
pub const DEFAULT_BIN_SIZE: f64 = 0.5;
pub const DEFAULT_MAP_EXTENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tpr: f64,
    pub iou: f64,
    pub detected: bool,
}

impl FrameScore {
    pub fn from_counts(tp: usize, fn_: usize, fp: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        FrameScore {
            tp,
            fn_,
            fp,
            tpr: ratio(tp, tp + fn_),
            iou: ratio(tp, tp + fp + fn_),
            detected: tp > 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub object_id: u32,
    pub class: ObjectClass,
    pub distance: f64,
    pub forward: f64,
    pub left: f64,
    /// Visible and within the range gate.
    pub in_range: bool,
    /// Visible at all (non-empty outline and at least one flow cell).
    pub visible: bool,
    #[serde(flatten)]
    pub score: FrameScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEvaluation {
    pub frame: usize,
    pub fp_pixels: usize,
    /// `fp_pixels` over the image area.
    pub fp_ratio: f64,
    pub objects: Vec<ObjectScore>,
}

/// Scores one mask against the ground truth of its frame. Only moving
/// objects are scored.
pub fn score_frame(
    mask: &GrayImage,
    objects: &[ObjectTruth],
    image_size: (usize, usize),
    range_gate: f64,
) -> Result<FrameEvaluation> {
    let (w, h) = image_size;
    if (mask.width(), mask.height()) != image_size {
        return Err(Error::DimensionMismatch {
            expected: image_size,
            actual: (mask.width(), mask.height()),
        });
    }
    let pixels = mask.pixels();
    let mut covered = vec![false; w * h];
    let mut scores = Vec::new();
    let frame = objects.first().map_or(0, |o| o.frame);
    for o in objects.iter().filter(|o| o.moving) {
        let (mut tp, mut area) = (0usize, 0usize);
        for span in o.polygon.spans(w, h) {
            let row = span.y * w;
            for i in row + span.x_start..row + span.x_end {
                covered[i] = true;
                area += 1;
                tp += usize::from(pixels[i] != 0);
            }
        }
        let visible = area > 0 && o.visible_cells > 0;
        scores.push((o, tp, area - tp, visible));
    }
    let fp_pixels = pixels.iter().zip(&covered).filter(|(&m, &c)| m != 0 && !c).count();
    let objects = scores
        .into_iter()
        .map(|(o, tp, fn_, visible)| ObjectScore {
            object_id: o.object_id,
            class: o.class,
            distance: o.distance,
            forward: o.forward,
            left: o.left,
            in_range: visible && o.distance <= range_gate,
            visible,
            score: FrameScore::from_counts(tp, fn_, fp_pixels),
        })
        .collect();
    Ok(FrameEvaluation {
        frame,
        fp_pixels,
        fp_ratio: fp_pixels as f64 / (w * h) as f64,
        objects,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: ObjectClass,
    /// In-range object-frames.
    pub frames: usize,
    pub detected: usize,
    pub detection_rate: f64,
    pub mean_tpr: f64,
    pub mean_iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub frames: usize,
    pub mean_fp_ratio: f64,
    pub max_fp_ratio: f64,
    pub classes: Vec<ClassSummary>,
}

/// Per-class detection rate and mean TPR / IoU over in-range object-frames.
pub fn aggregate(frames: &[FrameEvaluation]) -> Summary {
    let mut by_class: BTreeMap<ObjectClass, Vec<&FrameScore>> = BTreeMap::new();
    for o in frames.iter().flat_map(|f| &f.objects).filter(|o| o.in_range) {
        by_class.entry(o.class).or_default().push(&o.score);
    }
    let classes = by_class
        .into_iter()
        .map(|(class, scores)| {
            let n = scores.len();
            let detected = scores.iter().filter(|s| s.detected).count();
            let mean = |f: fn(&FrameScore) -> f64| scores.iter().map(|s| f(s)).sum::<f64>() / n as f64;
            ClassSummary {
                class,
                frames: n,
                detected,
                detection_rate: detected as f64 / n as f64,
                mean_tpr: mean(|s| s.tpr),
                mean_iou: mean(|s| s.iou),
            }
        })
        .collect();
    let fp: Vec<f64> = frames.iter().map(|f| f.fp_ratio).collect();
    Summary {
        frames: frames.len(),
        mean_fp_ratio: if fp.is_empty() { 0.0 } else { fp.iter().sum::<f64>() / fp.len() as f64 },
        max_fp_ratio: fp.iter().copied().fold(0.0, f64::max),
        classes,
    }
}

/// Detection rate binned over the object centroid position relative to the
/// camera. Column `c` covers `left ∈ [-extent + c·bin, -extent + (c+1)·bin)`,
/// row `r` likewise covers `forward`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMap {
    pub bin_size: f64,
    pub extent: f64,
    pub bins: usize,
    pub samples: Vec<u32>,
    pub detections: Vec<u32>,
}

impl RangeMap {
    pub fn new(bin_size: f64, extent: f64) -> Result<Self> {
        if !(bin_size > 0.0 && extent > 0.0 && bin_size.is_finite() && extent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "range map needs positive bin size and extent, got {bin_size} and {extent}"
            )));
        }
        let bins = (2.0 * extent / bin_size).ceil() as usize;
        Ok(RangeMap {
            bin_size,
            extent,
            bins,
            samples: vec![0; bins * bins],
            detections: vec![0; bins * bins],
        })
    }

    pub fn bin_of(&self, forward: f64, left: f64) -> Option<(usize, usize)> {
        let index = |v: f64| {
            let i = ((v + self.extent) / self.bin_size).floor();
            (i >= 0.0 && i < self.bins as f64).then_some(i as usize)
        };
        Some((index(left)?, index(forward)?))
    }

    pub fn add(&mut self, forward: f64, left: f64, detected: bool) {
        if let Some((col, row)) = self.bin_of(forward, left) {
            let i = row * self.bins + col;
            self.samples[i] += 1;
            self.detections[i] += u32::from(detected);
        }
    }

    /// Detection rate of a bin, `None` when it has no samples.
    pub fn rate(&self, col: usize, row: usize) -> Option<f64> {
        let i = row * self.bins + col;
        (self.samples[i] > 0).then(|| self.detections[i] as f64 / self.samples[i] as f64)
    }

    pub fn to_grid(&self) -> ScalarGrid {
        let mut grid = ScalarGrid::empty(self.bins, self.bins);
        for row in 0..self.bins {
            for col in 0..self.bins {
                grid.set(col, row, self.rate(col, row));
            }
        }
        grid
    }
}

/// Range map over every visible moving object-frame.
pub fn range_map(frames: &[FrameEvaluation], bin_size: f64, extent: f64) -> Result<RangeMap> {
    let mut map = RangeMap::new(bin_size, extent)?;
    for o in frames.iter().flat_map(|f| &f.objects).filter(|o| o.visible) {
        map.add(o.forward, o.left, o.score.detected);
    }
    Ok(map)
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<ObjectTruth>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| Error::format(path, format!("line {}: {e}", n + 1))))
        .collect()
}

/// Reads `object_id frame u1 v1 u2 v2 ...` lines.
pub fn read_polygons(path: &Path) -> Result<BTreeMap<(u32, usize), Polygon>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        let bad = |m: &str| Error::format(path, format!("line {}: {m}", n + 1));
        if fields.len() < 2 || !fields.len().is_multiple_of(2) {
            return Err(bad("expected object id, frame and coordinate pairs"));
        }
        let id: u32 = fields[0].parse().map_err(|_| bad("bad object id"))?;
        let frame: usize = fields[1].parse().map_err(|_| bad("bad frame index"))?;
        let coords: Vec<f64> = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad coordinate"))?;
        let vertices = coords.chunks_exact(2).map(|c| PixelPoint::new(c[0], c[1])).collect();
        out.insert((id, frame), Polygon::new(vertices));
    }
    Ok(out)
}

/// Ground-truth records with their polygons attached, grouped by frame.
pub fn load_truth(ground_truth: &Path, polygons: &Path) -> Result<BTreeMap<usize, Vec<ObjectTruth>>> {
    let mut shapes = read_polygons(polygons)?;
    let mut out: BTreeMap<usize, Vec<ObjectTruth>> = BTreeMap::new();
    for mut record in read_ground_truth(ground_truth)? {
        record.polygon = shapes.remove(&(record.object_id, record.frame)).unwrap_or_default();
        out.entry(record.frame).or_default().push(record);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub range_gate: f64,
    pub image_size: Option<(usize, usize)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            range_gate: DEFAULT_RANGE_GATE,
            image_size: None,
        }
    }
}

/// Scores every mask `mask_NNNNNN.pgm` in `masks_dir` that has ground truth.
pub fn evaluate_masks(
    masks_dir: &Path,
    truth: &BTreeMap<usize, Vec<ObjectTruth>>,
    options: &EvalOptions,
) -> Result<Vec<FrameEvaluation>> {
    let masks = list_indexed(masks_dir, "mask_", "pgm")?;
    let frames: Vec<usize> = masks.keys().filter(|k| truth.contains_key(k)).copied().collect();
    if frames.is_empty() {
        return Err(Error::NoOverlap);
    }
    frames
        .par_iter()
        .map(|k| {
            let mask = GrayImage::load(&masks[k])?;
            let size = options.image_size.unwrap_or((mask.width(), mask.height()));
            let mut eval = score_frame(&mask, &truth[k], size, options.range_gate)?;
            eval.frame = *k;
            Ok(eval)
        })
        .collect()
}

/// One JSON object per frame.
pub fn write_scores(path: &Path, frames: &[FrameEvaluation]) -> Result<()> {
    write_file(path, |w| {
        for f in frames {
            serde_json::to_writer(&mut *w, f).map_err(std::io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Frames listed in the ground truth.
pub fn truth_frames(truth: &BTreeMap<usize, Vec<ObjectTruth>>) -> BTreeSet<usize> {
    truth.keys().copied().collect()
}
