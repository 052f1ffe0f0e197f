use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spheremotion::eval::{
    aggregate, evaluate_masks, load_truth, range_map, write_scores, EvalOptions, Summary, DEFAULT_BIN_SIZE,
    DEFAULT_MAP_EXTENT, DEFAULT_RANGE_GATE,
};
use spheremotion::pipeline::{segment_dataset, PipelineConfig};
use spheremotion::sim::{
    write_dataset, Preset, SceneSpec, Simulator, CONFIG_FILE, GROUND_TRUTH_FILE, POLYGONS_FILE,
};
use spheremotion::{FisheyeCalibration, FusionWeights};

/// Motion segmentation for fisheye cameras on a moving vehicle.
#[derive(Debug, Parser)]
#[command(name = "spheremotion", version)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Simulate(SimulateArgs),
    /// Segment a dataset into moving and static regions.
    Segment(SegmentArgs),
    /// Score masks against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Crossing,
    Overtaking,
    Preceding,
    Approaching,
    StaticEgo,
    StaticWorld,
    StaticObstacle,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Crossing => Preset::Crossing,
            PresetArg::Overtaking => Preset::Overtaking,
            PresetArg::Preceding => Preset::Preceding,
            PresetArg::Approaching => Preset::Approaching,
            PresetArg::StaticEgo => Preset::StaticEgo,
            PresetArg::StaticWorld => Preset::StaticWorld,
            PresetArg::StaticObstacle => Preset::StaticObstacle,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Canonical scene.
    #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
    preset: Option<PresetArg>,
    /// Scene description file (TOML).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed of the flow noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flow end-point noise, pixels (overrides the scene).
    #[arg(long)]
    noise: Option<f64>,
    /// Number of frames (overrides the scene).
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Decision threshold on the fused likelihood.
    #[arg(long)]
    threshold: Option<f64>,
    /// Fusion weights `e,d,h,p,3v`.
    #[arg(long)]
    weights: Option<FusionWeights>,
    /// Flow averaging cell size, pixels.
    #[arg(long)]
    cell_size: Option<usize>,
    /// Slack of the positive height constraint.
    #[arg(long)]
    lambda_h: Option<f64>,
    /// Slack of the anti-parallel constraint.
    #[arg(long)]
    lambda_p: Option<f64>,
    /// Road displacement (metres) tolerated by the static-camera rule.
    #[arg(long)]
    lambda_s: Option<f64>,
    /// Translation (metres) below which the camera counts as static.
    #[arg(long)]
    motion_floor: Option<f64>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Dataset directory: supplies defaults for every input below.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Directory holding `mask_NNNNNN.pgm` files.
    #[arg(long, required_unless_present = "dataset")]
    masks: Option<PathBuf>,
    /// Ground-truth records (JSON lines).
    #[arg(long, required_unless_present = "dataset")]
    truth: Option<PathBuf>,
    /// Ground-truth polygons.
    #[arg(long, required_unless_present = "dataset")]
    polygons: Option<PathBuf>,
    /// Calibration, used to check mask dimensions.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Objects farther than this (metres) are not scored.
    #[arg(long, default_value_t = DEFAULT_RANGE_GATE)]
    range_gate: f64,
    /// Range-map bin size, metres.
    #[arg(long, default_value_t = DEFAULT_BIN_SIZE)]
    bin_size: f64,
    /// Range-map half extent, metres.
    #[arg(long, default_value_t = DEFAULT_MAP_EXTENT)]
    map_extent: f64,
    /// Directory for `scores.jsonl`, `summary.json` and `range_map.smlg`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Segment(args) => segment(args),
        Command::Evaluate(args) => evaluate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut spec = match (&args.preset, &args.scene) {
        (Some(p), _) => Preset::from(*p).spec(),
        (None, Some(path)) => SceneSpec::load(path)?,
        (None, None) => bail!("either --preset or --scene is required"),
    };
    if let Some(noise) = args.noise {
        spec.noise_sigma = noise;
    }
    if let Some(frames) = args.frames {
        spec.frames = frames;
    }
    let sim = Simulator::new(spec, args.seed)?;
    let summary = write_dataset(&sim, &args.out)?;
    println!(
        "wrote {} frame pairs and {} ground-truth records to {}",
        summary.pairs,
        summary.records,
        summary.dir.display()
    );
    Ok(())
}

fn segment(args: SegmentArgs) -> Result<()> {
    let mut config = PipelineConfig::load(&args.config)?;
    let s = &mut config.settings;
    if let Some(v) = args.threshold {
        s.threshold = v;
    }
    if let Some(v) = args.weights {
        s.weights = v;
    }
    if let Some(v) = args.cell_size {
        s.cell_size = v;
    }
    if let Some(v) = args.lambda_h {
        s.lambda_h = v;
    }
    if let Some(v) = args.lambda_p {
        s.lambda_p = v;
    }
    if let Some(v) = args.lambda_s {
        s.lambda_s = v;
    }
    if let Some(v) = args.motion_floor {
        s.motion_floor = v;
    }
    s.validate()?;
    if let Some(out) = args.out {
        config.output_dir = std::path::absolute(out)?;
    }
    let manifest = segment_dataset(&config)?;
    for skipped in &manifest.skipped {
        eprintln!("warning: skipped frame {}: {}", skipped.index, skipped.reason);
    }
    let moving: usize = manifest.frames.iter().map(|f| f.moving_cells).sum();
    println!(
        "segmented {} frame pairs ({} skipped, {} moving cells) into {}",
        manifest.frames.len(),
        manifest.skipped.len(),
        moving,
        config.output_path().display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let dataset = args.dataset.as_deref();
    let pick = |given: &Option<PathBuf>, default: &dyn Fn(&Path) -> Result<PathBuf>, what: &str| -> Result<PathBuf> {
        match (given, dataset) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(d)) => default(d),
            (None, None) => bail!("--{what} is required without --dataset"),
        }
    };
    let masks = pick(
        &args.masks,
        &|d| Ok(PipelineConfig::load(&d.join(CONFIG_FILE))?.output_path()),
        "masks",
    )?;
    let truth_path = pick(&args.truth, &|d| Ok(d.join(GROUND_TRUTH_FILE)), "truth")?;
    let polygons = pick(&args.polygons, &|d| Ok(d.join(POLYGONS_FILE)), "polygons")?;
    let calibration = match (&args.calibration, dataset) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join("calibration.toml")).filter(|p| p.is_file()),
        (None, None) => None,
    };
    let image_size = calibration
        .map(|p| FisheyeCalibration::load(&p))
        .transpose()?
        .map(|c| (c.image_size().0 as usize, c.image_size().1 as usize));

    let truth = load_truth(&truth_path, &polygons)
        .with_context(|| format!("reading ground truth {}", truth_path.display()))?;
    let options = EvalOptions {
        range_gate: args.range_gate,
        image_size,
    };
    let frames = evaluate_masks(&masks, &truth, &options)?;
    let summary = aggregate(&frames);
    print_summary(&summary);

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_scores(&out.join("scores.jsonl"), &frames)?;
        let text = serde_json::to_string_pretty(&summary)?;
        std::fs::write(out.join("summary.json"), text + "\n")?;
        range_map(&frames, args.bin_size, args.map_extent)?
            .to_grid()
            .save(&out.join("range_map.smlg"))?;
    }
    Ok(())
}

fn print_summary(summary: &Summary) {
    println!("{:<12} {:>7} {:>9} {:>9} {:>9}", "class", "frames", "detected", "mean TPR", "mean IoU");
    for c in &summary.classes {
        println!(
            "{:<12} {:>7} {:>8.1}% {:>9.3} {:>9.3}",
            c.class.name(),
            c.frames,
            100.0 * c.detection_rate,
            c.mean_tpr,
            c.mean_iou
        );
    }
    println!(
        "frames {}  false positives: mean {:.3}%  max {:.3}%",
        summary.frames,
        100.0 * summary.mean_fp_ratio,
        100.0 * summary.max_fp_ratio
    );
}
