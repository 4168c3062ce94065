use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fcmstop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcmstop"))
        .args(args)
        .env_remove("FCMSTOP_JOBS")
        .env_remove("FCMSTOP_MODEL")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fcmstop(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    fcmstop(args).status.code().unwrap()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// A small synthetic corpus and a model calibrated on it.
struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let f = Self { dir };
        let size = ["--width", "32", "--height", "32"];
        ok(&[&["synth", "--out", &s(&f.path("train")), "--count", "8", "--seed", "1"][..], &size].concat());
        ok(&[&["synth", "--out", &s(&f.path("test")), "--count", "3", "--seed", "2", "--truth"][..], &size].concat());
        ok(&["calibrate", "--input", &s(&f.path("train")), "--out", &s(&f.path("model.json"))]);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn synth_writes_images_and_truth() {
    let f = Fixture::new();
    assert!(f.path("test/scene000.png").is_file());
    assert!(f.path("test/truth").read_dir().unwrap().count() == 3);
    let img = image::open(f.path("test/scene002.png")).unwrap();
    assert_eq!((img.width(), img.height()), (32, 32));
}

#[test]
fn calibrate_prints_a_threshold_table() {
    let f = Fixture::new();
    let out = ok(&["calibrate", "--input", &s(&f.path("train")), "--out", &s(&f.path("m2.json")), "--accuracies", "0.9,0.99"]);
    assert!(out.contains("images               8"), "{out}");
    let rows: Vec<&str> = out.lines().skip_while(|l| !l.starts_with("accuracy")).skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.9 "));
}

#[test]
fn classify_notes_interpolated_thresholds() {
    let f = Fixture::new();
    let model = s(&f.path("model.json"));
    let image = s(&f.path("test/scene000.png"));
    let tabulated = ok(&["classify", "--model", &model, "--accuracy", "0.95", "--image", &image, "--out-dir", &s(&f.path("a"))]);
    assert!(!tabulated.contains("interpolated"));
    let between = ok(&["classify", "--model", &model, "--accuracy", "0.97", "--image", &image, "--out-dir", &s(&f.path("b"))]);
    assert!(between.contains("(interpolated)"), "{between}");
    let labels = image::open(f.path("b/scene000_labels.png")).unwrap();
    assert_eq!((labels.width(), labels.height()), (32, 32));
}

#[test]
fn model_path_comes_from_the_environment() {
    let f = Fixture::new();
    let out = Command::new(env!("CARGO_BIN_EXE_fcmstop"))
        .args(["classify", "--accuracy", "0.9", "--image", &s(&f.path("test/scene001.png")), "--out", &s(&f.path("l.png"))])
        .env("FCMSTOP_MODEL", f.path("model.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(f.path("l.png").is_file());
}

#[test]
fn evaluate_writes_one_row_per_level() {
    let f = Fixture::new();
    let out_dir = f.path("report");
    ok(&["evaluate", "--model", &s(&f.path("model.json")), "--input", &s(&f.path("test")), "--out-dir", &s(&out_dir)]);
    for file in ["accuracy.csv", "time.csv"] {
        let text = std::fs::read_to_string(out_dir.join(file)).unwrap();
        assert_eq!(text.lines().count(), 6, "{file}: {text}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["levels"].as_array().unwrap().len(), 5);
}

#[test]
fn cost_reproduces_the_worked_examples() {
    let saved = ok(&["cost", "--unit-price", "0.424", "--t-train", "0", "--t-actual", "10", "--t-total", "162045.31"]);
    assert!(saved.contains("68,702.97 USD"), "{saved}");
    let region = ok(&[
        "cost",
        "--unit-price",
        "0.424",
        "--area-km2",
        "423970",
        "--image-area-m2",
        "16520.74",
        "--saved-hours-per-image",
        "1",
    ]);
    assert!(region.contains("images in region    25662895"), "{region}");
}

#[test]
fn cost_reads_a_report() {
    let f = Fixture::new();
    let out_dir = f.path("report");
    ok(&["evaluate", "--model", &s(&f.path("model.json")), "--input", &s(&f.path("test")), "--out-dir", &s(&out_dir)]);
    let report = s(&out_dir.join("report.json"));
    let text = ok(&[
        "cost",
        "--unit-price",
        "1",
        "--report",
        &report,
        "--accuracy",
        "0.9",
        "--seconds-per-iteration",
        "3600",
        "--t-train",
        "0",
        "--json",
        &s(&f.path("cost.json")),
    ]);
    assert!(text.contains("saved cost"));
    assert!(f.path("cost.json").is_file());
    assert_eq!(code(&["cost", "--unit-price", "1", "--report", &report, "--seconds-per-iteration", "1", "--t-train", "0"]), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let f = Fixture::new();
    let model = s(&f.path("model.json"));
    let image = s(&f.path("test/scene000.png"));
    let test = s(&f.path("test"));
    let empty = f.path("empty");
    std::fs::create_dir(&empty).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["cost", "--unit-price", "-1", "--t-train", "1", "--t-actual", "1", "--t-total", "2"],
        vec!["cost", "--t-train", "1", "--t-actual", "1", "--t-total", "2"],
        vec!["calibrate", "--input", empty.to_str().unwrap(), "--out", "m.json"],
        vec!["classify", "--model", &model, "--accuracy", "1.5", "--image", &image, "--out", "x.png"],
        vec!["classify", "--model", &model, "--accuracy", "0.9", "--clusters", "4", "--image", &image, "--out", "x.png"],
        vec!["classify", "--model", "missing.json", "--accuracy", "0.9", "--image", &image, "--out", "x.png"],
        vec!["evaluate", "--model", &model, "--input", &test, "--out-dir", "r", "--jobs", "0"],
        vec!["calibrate"],
    ];
    for args in cases {
        assert_eq!(code(&args), 2, "{args:?}");
    }
}

#[test]
fn jobs_come_from_the_environment() {
    let f = Fixture::new();
    let out = Command::new(env!("CARGO_BIN_EXE_fcmstop"))
        .args(["evaluate", "--model", &s(&f.path("model.json")), "--input", &s(&f.path("test")), "--out-dir", "r"])
        .env("FCMSTOP_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_inputs_give_one_label_per_line() {
    let f = Fixture::new();
    let csv = f.path("points.csv");
    let mut text = String::new();
    for i in 0..60 {
        let v = (i % 6) as f64 / 5.0 + (i as f64 * 0.37).sin() * 0.01;
        text.push_str(&format!("{v},{},{}\n", 1.0 - v, v * 0.5));
    }
    std::fs::write(&csv, text).unwrap();
    let out = f.path("labels.csv");
    ok(&["classify", "--model", &s(&f.path("model.json")), "--accuracy", "0.9", "--image", &s(&csv), "--out", &s(&out)]);
    let labels = std::fs::read_to_string(out).unwrap();
    assert_eq!(labels.lines().count(), 60);
    assert!(labels.lines().all(|l| l.parse::<usize>().unwrap() < 6));
}
