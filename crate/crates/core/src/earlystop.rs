//! Testing phase: cluster new images and stop once the objective's change
//! rate drops below a calibrated threshold; in evaluation mode, measure the
//! accuracy reached at the stop point and the share of time it took.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{change_rate, corpus_fingerprint, CalibrationModel, CorpusImage};
use crate::clustering::{run_fcm, run_fcm_until, ClusterTrace, FcmConfig, FeatureMatrix, StopReason};
use crate::error::{Error, Result};
use crate::metrics::rand_index_contingency;

#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopResult {
    pub labels: Vec<usize>,
    /// 1-based iteration at which the run ended.
    pub stop_iteration: usize,
    pub objectives: Vec<f64>,
    pub elapsed_seconds: f64,
    pub stopped_early: bool,
}

/// True when the change rate at the latest iteration is strictly below `threshold`.
fn below_threshold(objectives: &[f64], threshold: f64) -> bool {
    let m = objectives.len();
    m >= 2 && change_rate(objectives, m).is_ok_and(|d| d < threshold)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold >= 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("stop threshold must be finite and non-negative, got {threshold}")))
    }
}

/// Clusters `features`, stopping at the first iteration `m >= 2` whose change
/// rate is below `threshold`. Without a trigger the run goes to convergence.
pub fn classify_early_stop(features: &FeatureMatrix, config: &FcmConfig, threshold: f64) -> Result<EarlyStopResult> {
    check_threshold(threshold)?;
    let (_, trace) = run_fcm_until(features, config, |t| below_threshold(&t.objectives, threshold))?;
    Ok(EarlyStopResult {
        stopped_early: trace.stop_reason == StopReason::Predicate,
        stop_iteration: trace.n_iterations(),
        elapsed_seconds: trace.iter_times.iter().sum(),
        labels: trace.labels.last().cloned().unwrap_or_default(),
        objectives: trace.objectives,
    })
}

/// How time fractions are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeBasis {
    /// Summed per-iteration wall-clock time.
    #[default]
    WallClock,
    /// Iteration counts; reproducible across machines and runs.
    Iterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub image_id: String,
    pub desired_accuracy: f64,
    pub threshold: f64,
    pub achieved_accuracy: f64,
    pub time_fraction: f64,
    pub stop_iteration: usize,
    pub total_iterations: usize,
    /// Wall-clock seconds up to the stop point and for the full run;
    /// only present under [`TimeBasis::WallClock`].
    pub stop_seconds: Option<f64>,
    pub total_seconds: Option<f64>,
}

/// First 1-based iteration whose change rate is below `threshold`, or `n`.
pub fn stop_point(trace: &ClusterTrace, threshold: f64) -> usize {
    let n = trace.n_iterations();
    (2..=n)
        .find(|&m| below_threshold(&trace.objectives[..m], threshold))
        .unwrap_or(n)
}

/// Reads the stop point and its accuracy and cost off a complete trace.
pub fn evaluate_trace(
    image_id: &str,
    trace: &ClusterTrace,
    threshold: f64,
    desired_accuracy: f64,
    basis: TimeBasis,
) -> Result<EvaluationRecord> {
    check_threshold(threshold)?;
    let n = trace.n_iterations();
    if n < 2 {
        return Err(Error::input("evaluation needs a trace of at least 2 iterations"));
    }
    let s = stop_point(trace, threshold);
    let achieved = if s == n {
        1.0
    } else {
        rand_index_contingency(&trace.labels[s - 1], &trace.labels[n - 1])?
    };
    let stop_seconds: f64 = trace.iter_times[..s].iter().sum();
    let total_seconds: f64 = trace.iter_times.iter().sum();
    let (time_fraction, stop_seconds, total_seconds) = match basis {
        TimeBasis::WallClock => {
            let fraction = if s == n || total_seconds <= 0.0 {
                1.0
            } else {
                stop_seconds / total_seconds
            };
            (fraction, Some(stop_seconds), Some(total_seconds))
        }
        TimeBasis::Iterations => (s as f64 / n as f64, None, None),
    };
    Ok(EvaluationRecord {
        image_id: image_id.to_owned(),
        desired_accuracy,
        threshold,
        achieved_accuracy: achieved,
        time_fraction,
        stop_iteration: s,
        total_iterations: n,
        stop_seconds,
        total_seconds,
    })
}

/// Runs one full trace and evaluates the stop point for `threshold`.
pub fn evaluate_early_stop(
    image_id: &str,
    features: &FeatureMatrix,
    config: &FcmConfig,
    threshold: f64,
    desired_accuracy: f64,
    basis: TimeBasis,
) -> Result<EvaluationRecord> {
    check_threshold(threshold)?;
    let (_, trace) = run_fcm(features, config)?;
    evaluate_trace(image_id, &trace, threshold, desired_accuracy, basis)
}

/// Aggregates for one desired accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub desired_accuracy: f64,
    pub threshold: f64,
    pub n_images: usize,
    pub mean_achieved: f64,
    /// Population standard deviation.
    pub std_achieved: f64,
    pub mean_time_fraction: f64,
}

impl LevelSummary {
    pub fn from_records(desired_accuracy: f64, threshold: f64, records: &[&EvaluationRecord]) -> Self {
        let n = records.len() as f64;
        let mean_achieved = records.iter().map(|r| r.achieved_accuracy).sum::<f64>() / n;
        let var = records
            .iter()
            .map(|r| (r.achieved_accuracy - mean_achieved).powi(2))
            .sum::<f64>()
            / n;
        Self {
            desired_accuracy,
            threshold,
            n_images: records.len(),
            mean_achieved,
            std_achieved: var.sqrt(),
            mean_time_fraction: records.iter().map(|r| r.time_fraction).sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub time_basis: TimeBasis,
    pub model_fingerprint: String,
    pub corpus_fingerprint: String,
    pub levels: Vec<LevelSummary>,
    /// Ordered by image id, then by desired accuracy.
    pub records: Vec<EvaluationRecord>,
}

impl EvaluationReport {
    pub fn records_for(&self, desired_accuracy: f64) -> Vec<&EvaluationRecord> {
        self.records
            .iter()
            .filter(|r| r.desired_accuracy == desired_accuracy)
            .collect()
    }

    pub fn level(&self, desired_accuracy: f64) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.desired_accuracy == desired_accuracy)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Output(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: "<report>".into(),
            reason: e.to_string(),
        })
    }

    /// `accuracy,mean_achieved,std_achieved`
    pub fn write_accuracy_csv(&self, path: &Path) -> Result<()> {
        write_rows(
            path,
            ["accuracy", "mean_achieved", "std_achieved"],
            self.levels.iter().map(|l| {
                vec![
                    l.desired_accuracy.to_string(),
                    l.mean_achieved.to_string(),
                    l.std_achieved.to_string(),
                ]
            }),
        )
    }

    /// `accuracy,mean_time_fraction`
    pub fn write_time_csv(&self, path: &Path) -> Result<()> {
        write_rows(
            path,
            ["accuracy", "mean_time_fraction"],
            self.levels
                .iter()
                .map(|l| vec![l.desired_accuracy.to_string(), l.mean_time_fraction.to_string()]),
        )
    }
}

fn write_rows<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let out = |e: csv::Error| Error::Output(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(out)?;
    w.write_record(header).map_err(out)?;
    for row in rows {
        w.write_record(&row).map_err(out)?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluates every image at every desired accuracy.
///
/// Each image is clustered once to convergence and all accuracy levels are
/// read off that single trace.
pub fn evaluate_corpus(
    corpus: &[CorpusImage],
    model: &CalibrationModel,
    accuracies: &[f64],
    config: &FcmConfig,
    basis: TimeBasis,
) -> Result<EvaluationReport> {
    if corpus.is_empty() {
        return Err(Error::input("evaluation corpus is empty"));
    }
    if accuracies.is_empty() {
        return Err(Error::input("no desired accuracies given"));
    }
    if config.n_clusters != model.fcm_config.n_clusters {
        return Err(Error::config(format!(
            "model was calibrated with {} clusters but evaluation uses {}",
            model.fcm_config.n_clusters, config.n_clusters
        )));
    }
    let fingerprint = corpus_fingerprint(corpus);
    if fingerprint == model.corpus_fingerprint {
        log::warn!("evaluation corpus is identical to the training corpus");
    }
    let thresholds = accuracies
        .iter()
        .map(|&a| model.threshold_for(a))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<&CorpusImage> = corpus.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let per_image: Vec<Vec<EvaluationRecord>> = order
        .par_iter()
        .map(|image| {
            let (_, trace) = run_fcm(&image.features, config)?;
            accuracies
                .iter()
                .zip(&thresholds)
                .map(|(&a, &t)| evaluate_trace(&image.id, &trace, t, a, basis))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let records: Vec<EvaluationRecord> = per_image.into_iter().flatten().collect();

    let levels = accuracies
        .iter()
        .zip(&thresholds)
        .map(|(&a, &t)| {
            let subset: Vec<&EvaluationRecord> = records.iter().filter(|r| r.desired_accuracy == a).collect();
            LevelSummary::from_records(a, t, &subset)
        })
        .collect();
    Ok(EvaluationReport {
        time_basis: basis,
        model_fingerprint: model.corpus_fingerprint.clone(),
        corpus_fingerprint: fingerprint,
        levels,
        records,
    })
}
