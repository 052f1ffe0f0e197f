use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::{flow_file_name, PipelineConfig};
use crate::raster::write_file;
use crate::sim::simulator::{ObjectTruth, Simulator};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const POLYGONS_FILE: &str = "polygons.txt";
pub const SCENE_FILE: &str = "scene.toml";
pub const CONFIG_FILE: &str = "pipeline.toml";

/// Files produced by [`write_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub dir: PathBuf,
    pub pairs: usize,
    pub records: usize,
}

/// `object_id frame u1 v1 u2 v2 ...`
pub fn polygon_line(truth: &ObjectTruth) -> String {
    let mut line = format!("{} {}", truth.object_id, truth.frame);
    for v in &truth.polygon.vertices {
        write!(line, " {} {}", v.u, v.v).expect("write to string");
    }
    line
}

/// Writes calibration, mounting, odometry, scene, pipeline configuration,
/// one flow file per pair and the ground truth into `dir`.
pub fn write_dataset(sim: &Simulator, dir: &Path) -> Result<DatasetSummary> {
    let flow_dir = dir.join("flow");
    std::fs::create_dir_all(&flow_dir).map_err(|e| Error::io(&flow_dir, e))?;
    let text_file = |name: &str, text: String| {
        let path = dir.join(name);
        write_file(&path, |w| w.write_all(text.as_bytes()))
    };
    text_file("calibration.toml", sim.calibration().to_toml_string())?;
    text_file("mounting.toml", sim.mounting().to_toml_string())?;
    text_file("odometry.txt", sim.odometry().to_text())?;
    text_file(SCENE_FILE, sim.spec().to_toml_string())?;
    let mut config = PipelineConfig::for_dataset();
    config.settings.frame_rate = sim.spec().frame_rate;
    config.settings.cell_size = sim.cell_size();
    text_file(CONFIG_FILE, config.to_toml_string())?;

    let mut truth = String::new();
    let mut polygons = String::new();
    let mut records = 0;
    for k in 1..=sim.pairs() {
        let pair = sim.simulate_pair(k)?;
        pair.flow.save(&flow_dir.join(flow_file_name(k)))?;
        for object in &pair.objects {
            truth.push_str(&serde_json::to_string(object).expect("record serializes"));
            truth.push('\n');
            polygons.push_str(&polygon_line(object));
            polygons.push('\n');
            records += 1;
        }
    }
    text_file(GROUND_TRUTH_FILE, truth)?;
    text_file(POLYGONS_FILE, polygons)?;
    Ok(DatasetSummary {
        dir: dir.to_path_buf(),
        pairs: sim.pairs(),
        records,
    })
}
