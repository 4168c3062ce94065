//! Training phase: learn the accuracy -> change-rate threshold relation from a
//! corpus of fully converged runs.
//!
//! Every training image is clustered to convergence. Each iteration `m >= 2`
//! yields a point `(r_m, delta_m)`: the Rand Index of that iteration's labels
//! against the final labels, and the relative decrease of the objective. The
//! pooled points are standardized on `(r, ln delta)`, screened with LOF, and
//! an RBF SVR of `ln delta` on `r` is fitted to the survivors. The regressor
//! is evaluated on a grid of desired accuracies to build a monotone
//! threshold table.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anomaly::{lof_scores, remove_outliers, LofConfig};
use crate::clustering::{run_fcm, FcmConfig, FeatureMatrix};
use crate::error::{Error, Result};
use crate::metrics::accuracy_trace;
use crate::regression::{fit_svr, SvrHyperparams, SvrModel};

/// Version written to and required from model documents.
pub const MODEL_VERSION: u64 = 1;

/// Resolution of off-table threshold lookups.
const LOOKUP_STEP: f64 = 1e-4;

/// Desired-accuracy grid used when none is given.
pub const DEFAULT_ACCURACY_GRID: [f64; 5] = [0.85, 0.90, 0.95, 0.99, 0.999];

/// One image of a corpus, identified by a stable id.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusImage {
    pub id: String,
    pub features: FeatureMatrix,
}

impl CorpusImage {
    pub fn new(id: impl Into<String>, features: FeatureMatrix) -> Self {
        Self {
            id: id.into(),
            features,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub image_id: String,
    /// 1-based iteration index, at least 2.
    pub iteration: usize,
    pub accuracy: f64,
    pub change_rate: f64,
}

/// Relative decrease `(J_{m-1} - J_m) / J_{m-1}` at 1-based iteration `m`.
///
/// Zero when the previous objective is zero. Tiny negative values from
/// rounding on a stalled objective are reported as zero.
pub fn change_rate(objectives: &[f64], m: usize) -> Result<f64> {
    if m < 2 || m > objectives.len() {
        return Err(Error::input(format!(
            "change rate needs 2 <= m <= {}, got m = {m}",
            objectives.len()
        )));
    }
    let (prev, cur) = (objectives[m - 2], objectives[m - 1]);
    if prev == 0.0 {
        return Ok(0.0);
    }
    Ok(((prev - cur) / prev).max(0.0))
}

/// Output of the harvesting step.
#[derive(Clone, Debug)]
pub struct Harvest {
    pub points: Vec<CalibrationPoint>,
    /// Summed per-iteration clustering time over all images.
    pub training_seconds: f64,
    pub total_iterations: usize,
    pub skipped: Vec<String>,
}

/// Clusters every image to convergence and emits `n - 1` points per image.
///
/// Images whose run fails are skipped with a warning; the call fails only
/// if no image succeeds.
pub fn collect_calibration_points(corpus: &[CorpusImage], config: &FcmConfig) -> Result<Harvest> {
    if corpus.is_empty() {
        return Err(Error::Calibration("training corpus is empty".into()));
    }
    config.validate()?;
    let runs: Vec<Result<(Vec<CalibrationPoint>, f64, usize)>> = corpus
        .par_iter()
        .map(|image| {
            let (_, trace) = run_fcm(&image.features, config)?;
            let accuracies = accuracy_trace(&trace)?;
            let points = (2..=trace.n_iterations())
                .map(|m| {
                    Ok(CalibrationPoint {
                        image_id: image.id.clone(),
                        iteration: m,
                        accuracy: accuracies[m - 1],
                        change_rate: change_rate(&trace.objectives, m)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((points, trace.iter_times.iter().sum(), trace.n_iterations()))
        })
        .collect();

    let mut harvest = Harvest {
        points: Vec::new(),
        training_seconds: 0.0,
        total_iterations: 0,
        skipped: Vec::new(),
    };
    for (image, run) in corpus.iter().zip(runs) {
        match run {
            Ok((points, seconds, iterations)) => {
                harvest.points.extend(points);
                harvest.training_seconds += seconds;
                harvest.total_iterations += iterations;
            }
            Err(e) => {
                log::warn!("skipping training image {}: {e}", image.id);
                harvest.skipped.push(image.id.clone());
            }
        }
    }
    if harvest.skipped.len() == corpus.len() {
        return Err(Error::Calibration("clustering failed on every training image".into()));
    }
    harvest
        .points
        .sort_by(|a, b| a.image_id.cmp(&b.image_id).then(a.iteration.cmp(&b.iteration)));
    Ok(harvest)
}

/// Writes points as `image_id,iteration,accuracy,change_rate`.
pub fn write_points_csv(points: &[CalibrationPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Output(e.to_string()))?;
    for p in points {
        w.serialize(p).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-dimension standardization of `(accuracy, ln change_rate)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: [f64; 2],
    pub stds: [f64; 2],
}

impl Scaler {
    fn fit(rows: &[[f64; 2]]) -> Result<Self> {
        let n = rows.len() as f64;
        let mut means = [0.0; 2];
        let mut stds = [0.0; 2];
        for d in 0..2 {
            means[d] = rows.iter().map(|r| r[d]).sum::<f64>() / n;
            stds[d] = (rows.iter().map(|r| (r[d] - means[d]).powi(2)).sum::<f64>() / n).sqrt();
            if !(stds[d] > 0.0) {
                let name = if d == 0 { "accuracy" } else { "ln change rate" };
                return Err(Error::Calibration(format!(
                    "calibration points have no spread in {name}"
                )));
            }
        }
        Ok(Self { means, stds })
    }

    pub fn scale(&self, row: [f64; 2]) -> [f64; 2] {
        [
            (row[0] - self.means[0]) / self.stds[0],
            (row[1] - self.means[1]) / self.stds[1],
        ]
    }

    pub fn scale_accuracy(&self, accuracy: f64) -> f64 {
        (accuracy - self.means[0]) / self.stds[0]
    }

    pub fn unscale_log_rate(&self, z: f64) -> f64 {
        z * self.stds[1] + self.means[1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub accuracy: f64,
    pub threshold: f64,
}

/// Counts describing how a model was fitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_points: usize,
    pub n_zero_rate_dropped: usize,
    pub n_outliers_removed: usize,
    pub n_support_vectors: usize,
    pub training_iterations: usize,
}

/// The trained artifact: scaler, regressor and accuracy -> threshold table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub version: u64,
    pub scaler: Scaler,
    pub svr: SvrModel,
    pub fcm_config: FcmConfig,
    /// Sorted by ascending accuracy; thresholds non-increasing.
    pub threshold_table: Vec<ThresholdEntry>,
    pub corpus_fingerprint: String,
    /// Absent when timing was not recorded, which keeps documents reproducible.
    pub training_time_seconds: Option<f64>,
    pub fit_summary: FitSummary,
}

fn validate_accuracy(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("desired accuracy must lie in (0, 1), got {a}")))
    }
}

/// Standardizes, removes LOF outliers, fits the SVR and tabulates thresholds.
///
/// Metadata (`fcm_config`, fingerprint, timing) is left at defaults; see
/// [`calibrate`] for the full training phase.
pub fn fit_threshold_model(
    points: &[CalibrationPoint],
    lof: &LofConfig,
    svr: &SvrHyperparams,
    accuracy_grid: &[f64],
) -> Result<CalibrationModel> {
    svr.validate()?;
    let mut grid = accuracy_grid.to_vec();
    if grid.is_empty() {
        return Err(Error::config("accuracy grid is empty"));
    }
    for &a in &grid {
        validate_accuracy(a)?;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let rows: Vec<[f64; 2]> = points
        .iter()
        .filter(|p| p.change_rate > 0.0 && p.change_rate.is_finite())
        .map(|p| [p.accuracy, p.change_rate.ln()])
        .collect();
    let n_zero = points.len() - rows.len();
    if rows.len() < lof.n_neighbors + 1 {
        return Err(Error::Calibration(format!(
            "{} usable calibration points; at least {} required",
            rows.len(),
            lof.n_neighbors + 1
        )));
    }
    lof.validate(rows.len())?;

    let scaler = Scaler::fit(&rows)?;
    let scaled: Vec<[f64; 2]> = rows.iter().map(|&r| scaler.scale(r)).collect();
    let scores = lof_scores(&scaled, lof.n_neighbors)?;
    let (kept, removed) = remove_outliers(&scaled, &scores, lof.outliers_fraction)?;

    let xs: Vec<f64> = kept.iter().map(|r| r[0]).collect();
    let ys: Vec<f64> = kept.iter().map(|r| r[1]).collect();
    let regressor = fit_svr(&xs, &ys, svr)?;

    let mut model = CalibrationModel {
        version: MODEL_VERSION,
        fit_summary: FitSummary {
            n_points: points.len(),
            n_zero_rate_dropped: n_zero,
            n_outliers_removed: removed.len(),
            n_support_vectors: regressor.dual_coeffs.len(),
            training_iterations: 0,
        },
        scaler,
        svr: regressor,
        fcm_config: FcmConfig::default(),
        threshold_table: Vec::new(),
        corpus_fingerprint: String::new(),
        training_time_seconds: None,
    };

    let mut thresholds: Vec<f64> = grid.iter().map(|&a| model.raw_threshold(a)).collect();
    for i in (0..thresholds.len().saturating_sub(1)).rev() {
        thresholds[i] = thresholds[i].max(thresholds[i + 1]);
    }
    if let Some(bad) = thresholds.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::Calibration(format!("regressor produced threshold {bad}")));
    }
    model.threshold_table = grid
        .iter()
        .zip(&thresholds)
        .map(|(&accuracy, &threshold)| ThresholdEntry { accuracy, threshold })
        .collect();
    Ok(model)
}

impl CalibrationModel {
    /// Regressor prediction without monotone clipping.
    pub fn raw_threshold(&self, accuracy: f64) -> f64 {
        let z = self.scaler.scale_accuracy(accuracy);
        self.scaler.unscale_log_rate(self.svr.predict(z)).exp()
    }

    pub fn table_entry(&self, accuracy: f64) -> Option<&ThresholdEntry> {
        self.threshold_table.iter().find(|e| e.accuracy == accuracy)
    }

    /// Stop threshold for a desired accuracy; see [`threshold_for`].
    pub fn threshold_for(&self, accuracy: f64) -> Result<f64> {
        threshold_for(self, accuracy)
    }
}

/// Stop threshold for `desired_accuracy`.
///
/// Table entries are returned verbatim. Other accuracies evaluate the
/// regressor on a `1e-4` lattice anchored at the neighboring table entry and
/// take the running extremum, clipped to the neighbors' thresholds, so the
/// result is non-increasing in accuracy over the whole range.
pub fn threshold_for(model: &CalibrationModel, desired_accuracy: f64) -> Result<f64> {
    validate_accuracy(desired_accuracy)?;
    if let Some(entry) = model.table_entry(desired_accuracy) {
        return Ok(entry.threshold);
    }
    let table = &model.threshold_table;
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok(model.raw_threshold(desired_accuracy)),
    };
    let lattice = |span: f64| -> usize { (span / LOOKUP_STEP + 1e-9).floor() as usize };

    if desired_accuracy < first.accuracy {
        let steps = lattice(first.accuracy - desired_accuracy);
        let value = (1..=steps)
            .map(|k| model.raw_threshold(first.accuracy - k as f64 * LOOKUP_STEP))
            .fold(first.threshold, f64::max);
        return Ok(value);
    }
    let upper = table.iter().position(|e| e.accuracy > desired_accuracy);
    let (anchor, floor) = match upper {
        Some(i) => (&table[i - 1], table[i].threshold),
        None => (last, 0.0),
    };
    let steps = lattice(desired_accuracy - anchor.accuracy);
    let value = (1..=steps)
        .map(|k| model.raw_threshold(anchor.accuracy + k as f64 * LOOKUP_STEP))
        .fold(anchor.threshold, f64::min);
    Ok(value.max(floor))
}

pub fn save_model(model: &CalibrationModel, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(model).map_err(|e| Error::Output(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

const REQUIRED_FIELDS: [&str; 8] = [
    "version",
    "scaler",
    "svr",
    "fcm_config",
    "threshold_table",
    "corpus_fingerprint",
    "training_time_seconds",
    "fit_summary",
];

pub fn parse_model(text: &str) -> Result<CalibrationModel> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Schema {
        path: "<document>".into(),
        reason: e.to_string(),
    })?;
    let object = value.as_object().ok_or_else(|| Error::Schema {
        path: "<document>".into(),
        reason: "expected a JSON object".into(),
    })?;
    for field in REQUIRED_FIELDS {
        if !object.contains_key(field) {
            return Err(Error::Schema {
                path: field.into(),
                reason: "missing field".into(),
            });
        }
    }
    match object["version"].as_u64() {
        Some(MODEL_VERSION) => {}
        Some(found) => {
            return Err(Error::IncompatibleVersion {
                found,
                expected: MODEL_VERSION,
            })
        }
        None => {
            return Err(Error::Schema {
                path: "version".into(),
                reason: "expected an unsigned integer".into(),
            })
        }
    }
    let model: CalibrationModel = serde_path_to_error::deserialize(value).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        reason: e.inner().to_string(),
    })?;
    for (i, entry) in model.threshold_table.iter().enumerate() {
        if !(entry.accuracy > 0.0 && entry.accuracy < 1.0 && entry.threshold > 0.0) {
            return Err(Error::Schema {
                path: format!("threshold_table[{i}]"),
                reason: "entries need accuracy in (0, 1) and a positive threshold".into(),
            });
        }
    }
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<CalibrationModel> {
    parse_model(&std::fs::read_to_string(path)?)
}

/// Hex SHA-256 over the corpus sorted by id: each image contributes its id,
/// its shape and the little-endian bytes of its feature values.
pub fn corpus_fingerprint(corpus: &[CorpusImage]) -> String {
    let mut order: Vec<&CorpusImage> = corpus.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut outer = Sha256::new();
    for image in order {
        let mut inner = Sha256::new();
        inner.update((image.features.n_points() as u64).to_le_bytes());
        inner.update((image.features.n_dims() as u64).to_le_bytes());
        for v in image.features.values() {
            inner.update(v.to_le_bytes());
        }
        outer.update(image.id.as_bytes());
        outer.update([0u8]);
        outer.update(inner.finalize());
    }
    hex(&outer.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything the training phase needs besides the corpus.
#[derive(Clone, Debug)]
pub struct CalibrationSettings {
    pub fcm: FcmConfig,
    pub lof: LofConfig,
    pub svr: SvrHyperparams,
    pub accuracy_grid: Vec<f64>,
    /// Store measured training time in the model. Off by default so that
    /// identical inputs give byte-identical documents.
    pub record_training_time: bool,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            fcm: FcmConfig::default(),
            lof: LofConfig::default(),
            svr: SvrHyperparams::default(),
            accuracy_grid: DEFAULT_ACCURACY_GRID.to_vec(),
            record_training_time: false,
        }
    }
}

/// Full training phase: harvest, screen, fit, tabulate.
pub fn calibrate(corpus: &[CorpusImage], settings: &CalibrationSettings) -> Result<(CalibrationModel, Harvest)> {
    let started = Instant::now();
    let harvest = collect_calibration_points(corpus, &settings.fcm)?;
    let mut model = fit_threshold_model(&harvest.points, &settings.lof, &settings.svr, &settings.accuracy_grid)?;
    model.fcm_config = settings.fcm.clone();
    model.corpus_fingerprint = corpus_fingerprint(corpus);
    model.fit_summary.training_iterations = harvest.total_iterations;
    if settings.record_training_time {
        model.training_time_seconds = Some(started.elapsed().as_secs_f64());
    }
    Ok((model, harvest))
}
