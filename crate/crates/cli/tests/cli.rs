use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spheremotion::eval::load_truth;
use spheremotion::pipeline::mask_file_name;
use spheremotion::raster::GrayImage;
use spheremotion::sim::{GROUND_TRUTH_FILE, POLYGONS_FILE};

const PRESETS: [&str; 7] = [
    "crossing",
    "overtaking",
    "preceding",
    "approaching",
    "static-ego",
    "static-world",
    "static-obstacle",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spheremotion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, preset: &str, extra: &[&str]) -> PathBuf {
    let data = dir.join(preset);
    let mut args = vec!["simulate", "--preset", preset, "--out", s(&data)];
    args.extend_from_slice(extra);
    ok(&args);
    data
}

fn segment(data: &Path, extra: &[&str]) -> PathBuf {
    let config = data.join("pipeline.toml");
    let mut args = vec!["segment", "--config", s(&config)];
    args.extend_from_slice(extra);
    ok(&args);
    data.join("segmentation")
}

/// Every file below `dir`, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn masks(dir: &Path) -> Vec<GrayImage> {
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("mask_"))
        .collect();
    names.sort();
    names.iter().map(|n| GrayImage::load(&dir.join(n)).unwrap()).collect()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn close(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * (1.0 + x.abs()) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .try_for_each(|(i, (x, y))| close(x, y, &format!("{path}[{i}]"))),
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x.iter().try_for_each(|(k, v)| {
            y.get(k)
                .ok_or_else(|| format!("{path}.{k} missing"))
                .and_then(|w| close(v, w, &format!("{path}.{k}")))
        }),
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = s(tmp.path());
    assert_eq!(run(&["simulate", "--preset", "nowhere", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--masks", out]).status.code(), Some(2));
    assert_eq!(run(&["segment", "--weights", "1,2", "--config", "x.toml"]).status.code(), Some(2));

    let missing = tmp.path().join("missing.toml");
    let failed = run(&["segment", "--config", s(&missing)]);
    assert_eq!(failed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failed.stderr).starts_with("error:"));

    let data = simulate(tmp.path(), "crossing", &["--frames", "3"]);
    let config = data.join("pipeline.toml");
    assert_eq!(run(&["segment", "--config", s(&config), "--threshold", "1.5"]).status.code(), Some(1));
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let run_with = |name: &str, seed: &str| {
        let dir = tmp.path().join(name);
        simulate(&dir, "overtaking", &["--frames", "4", "--noise", "0.5", "--seed", seed])
    };
    let (a, b, c) = (run_with("a", "3"), run_with("b", "3"), run_with("c", "4"));
    let (ta, tb, tc) = (tree(&a), tree(&b), tree(&c));
    for name in ["calibration.toml", "mounting.toml", "odometry.txt", "scene.toml", "pipeline.toml", GROUND_TRUTH_FILE, POLYGONS_FILE] {
        assert!(ta.contains_key(Path::new(name)), "{name} missing");
    }
    assert_eq!(ta.keys().filter(|k| k.starts_with("flow")).count(), 3);
    assert_eq!(ta, tb);
    let flow = Path::new("flow/flow_000001.smfl");
    assert_ne!(ta[flow], tc[flow], "seed must change the noise");
}

#[test]
fn static_world_gives_blank_masks_and_crossing_does_not() {
    let tmp = tempfile::tempdir().unwrap();
    let world = segment(&simulate(tmp.path(), "static-world", &["--frames", "6"]), &[]);
    let blank = masks(&world);
    assert_eq!(blank.len(), 5);
    assert!(blank.iter().all(|m| m.pixels().iter().all(|&p| p == 0)));

    let crossing = segment(&simulate(tmp.path(), "crossing", &["--frames", "6"]), &[]);
    let marked = masks(&crossing);
    assert_eq!(marked.len(), 5);
    assert!(marked.iter().all(|m| m.pixels().iter().any(|&p| p != 0)));
}

#[test]
fn flags_override_the_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path(), "crossing", &["--frames", "4"]);
    let out = tmp.path().join("strict");
    segment(&data, &["--threshold", "1.0", "--out", s(&out)]);
    let strict = masks(&out);
    assert_eq!(strict.len(), 3);
    assert!(strict.iter().all(|m| m.pixels().iter().all(|&p| p == 0)));
    assert!(!data.join("segmentation").exists(), "--out replaces the configured directory");
}

#[test]
fn segmentation_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path(), "approaching", &["--frames", "5", "--noise", "0.5", "--seed", "9"]);
    let first = tree(&segment(&data, &[]));
    let second = tree(&segment(&data, &["--jobs", "1"]));
    assert!(first.len() > 4);
    assert_eq!(first, second);
}

#[test]
fn evaluation_scores_perfect_and_empty_masks() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate(tmp.path(), "overtaking", &["--frames", "8"]);
    let truth = load_truth(&data.join(GROUND_TRUTH_FILE), &data.join(POLYGONS_FILE)).unwrap();
    let (perfect, empty) = (tmp.path().join("perfect"), tmp.path().join("empty"));
    std::fs::create_dir_all(&perfect).unwrap();
    std::fs::create_dir_all(&empty).unwrap();
    for k in 1..=7 {
        let mut bits = vec![false; 640 * 480];
        for object in truth.get(&k).into_iter().flatten().filter(|o| o.moving) {
            for span in object.polygon.spans(640, 480) {
                bits[span.y * 640 + span.x_start..span.y * 640 + span.x_end].fill(true);
            }
        }
        GrayImage::from_fn(640, 480, |x, y| if bits[y * 640 + x] { 255 } else { 0 })
            .save(&perfect.join(mask_file_name(k)))
            .unwrap();
        GrayImage::from_fn(640, 480, |_, _| 0).save(&empty.join(mask_file_name(k))).unwrap();
    }

    for (masks, rate) in [(&perfect, 1.0), (&empty, 0.0)] {
        let out = masks.join("scores");
        ok(&["evaluate", "--dataset", s(&data), "--masks", s(masks), "--out", s(&out)]);
        let summary = summary(&out);
        assert_eq!(summary["max_fp_ratio"], 0.0);
        let classes = summary["classes"].as_array().unwrap();
        assert!(!classes.is_empty());
        for class in classes {
            assert!(class["frames"].as_u64().unwrap() > 0);
            assert_eq!(class["detection_rate"], rate);
            assert_eq!(class["mean_tpr"], rate);
            assert_eq!(class["mean_iou"], rate);
        }
        assert!(out.join("scores.jsonl").is_file() && out.join("range_map.smlg").is_file());
    }
}

#[test]
fn canonical_presets_match_golden_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for preset in PRESETS {
        let data = simulate(tmp.path(), preset, &["--noise", "0.5", "--seed", "7"]);
        segment(&data, &[]);
        let out = data.join("scores");
        let args = ["evaluate", "--dataset", s(&data), "--out", s(&out)];
        if preset == "static-world" {
            // nothing to score: no ground-truth frames overlap the masks
            assert_eq!(run(&args).status.code(), Some(1));
            continue;
        }
        ok(&args);
        let actual = summary(&out);
        let file = golden.join(format!("{preset}.json"));
        if update {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&file, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
            continue;
        }
        let expected: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        if let Err(e) = close(&actual, &expected, preset) {
            failures.push(e);
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
