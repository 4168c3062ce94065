//! Fuzzy c-means image clustering with calibrated early stopping.
//!
//! A training corpus is clustered to convergence to learn how the relative
//! decrease of the objective relates to the accuracy already reached
//! (measured by the Rand Index against the converged partition). The learned
//! relation turns a desired accuracy into a stop threshold, which then cuts
//! clustering of new images short. A small cost model turns the saved time
//! into money.
//!
//! Modules, in pipeline order:
//!
//! * [`clustering`]: fuzzy c-means with per-iteration traces
//! * [`metrics`]: Rand Index and accuracy traces
//! * [`anomaly`]: Local Outlier Factor screening
//! * [`regression`]: epsilon-SVR (RBF) and a least-squares baseline
//! * [`calibration`]: training phase and the persisted model
//! * [`earlystop`]: testing phase and evaluation reports
//! * [`cost`]: on-demand cloud cost arithmetic
//! * [`imagery`]: PNG/PPM/CSV ingestion and label-map output
//! * [`synthetic`]: seeded synthetic scenes and blobs

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anomaly;
pub mod calibration;
pub mod clustering;
pub mod cost;
pub mod earlystop;
mod error;
pub mod imagery;
pub mod metrics;
pub mod regression;
pub mod synthetic;

pub use anomaly::{lof_scores, remove_outliers, LofConfig};
pub use calibration::{
    calibrate, change_rate, collect_calibration_points, fit_threshold_model, load_model, save_model,
    threshold_for, CalibrationModel, CalibrationPoint, CalibrationSettings, CorpusImage, Scaler,
    ThresholdEntry, DEFAULT_ACCURACY_GRID,
};
pub use clustering::{
    compute_centers, hard_labels, init_membership, objective, run_fcm, run_fcm_until, update_memberships,
    Centers, ClusterTrace, FcmConfig, FcmSolver, FeatureMatrix, FuzzyState, Memberships, StopReason,
};
pub use cost::{
    compute_cost, cost_effectiveness, extrapolate_savings, total_time, Cents, CostReport, PriceSheet,
};
pub use earlystop::{
    classify_early_stop, evaluate_corpus, evaluate_early_stop, EarlyStopResult, EvaluationRecord,
    EvaluationReport, TimeBasis,
};
pub use error::{Error, Result};
pub use imagery::{
    load_corpus_dir, load_feature_csv, load_image_features, write_label_image, write_rgb_image, ImageRecord, LabelMap,
};
pub use metrics::{accuracy_trace, rand_index_contingency, rand_index_pairwise, PairCounts};
pub use regression::{fit_linear, fit_svr, predict_linear, predict_svr, rbf_kernel, Gamma, LinearModel, SvrHyperparams, SvrModel};
