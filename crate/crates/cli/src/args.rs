use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fcmstop_core::{FcmConfig, Gamma, LofConfig, SvrHyperparams, TimeBasis};

#[derive(Debug, Parser)]
#[command(name = "fcmstop", version, about = "Fuzzy c-means image clustering with calibrated early stopping")]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn change-rate thresholds from a training corpus.
    Calibrate(CalibrateArgs),
    /// Cluster images, stopping at a desired accuracy.
    Classify(ClassifyArgs),
    /// Measure achieved accuracy and time savings on a test corpus.
    Evaluate(EvaluateArgs),
    /// Turn computation time into cost and savings figures.
    Cost(CostArgs),
    /// Write a corpus of synthetic six-region scenes.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Directory of PNG, PPM or CSV inputs.
    #[arg(long)]
    pub input: PathBuf,

    /// CSV inputs start with a header row.
    #[arg(long)]
    pub header: bool,
}

/// FCM settings; unset fields fall back to defaults or the model's values.
#[derive(Debug, Args, Default)]
pub struct FcmArgs {
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub clusters: Option<usize>,

    #[arg(long)]
    pub fuzzifier: Option<f64>,

    /// Termination threshold on the largest membership change.
    #[arg(long = "fcm-epsilon")]
    pub epsilon: Option<f64>,

    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl FcmArgs {
    pub fn apply(&self, base: &FcmConfig) -> FcmConfig {
        FcmConfig {
            n_clusters: self.clusters.unwrap_or(base.n_clusters),
            fuzzifier: self.fuzzifier.unwrap_or(base.fuzzifier),
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
            seed: self.seed.unwrap_or(base.seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct JobsArg {
    /// Worker threads; 1 runs everything serially.
    #[arg(long, env = "FCMSTOP_JOBS", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Where to write the model document.
    #[arg(long)]
    pub out: PathBuf,

    /// Desired accuracies to tabulate.
    #[arg(long, value_delimiter = ',', default_values_t = fcmstop_core::DEFAULT_ACCURACY_GRID)]
    pub accuracies: Vec<f64>,

    #[command(flatten)]
    pub fcm: FcmArgs,

    #[arg(long, default_value_t = LofConfig::default().n_neighbors)]
    pub lof_neighbors: usize,

    #[arg(long, default_value_t = LofConfig::default().outliers_fraction)]
    pub outliers_fraction: f64,

    #[arg(long, default_value_t = SvrHyperparams::default().c)]
    pub svr_c: f64,

    /// Half-width of the SVR insensitive tube.
    #[arg(long, default_value_t = SvrHyperparams::default().epsilon_tube)]
    pub svr_epsilon: f64,

    /// RBF width: "scale" or a positive number.
    #[arg(long, default_value_t = Gamma::Scale)]
    pub svr_gamma: Gamma,

    #[arg(long, default_value_t = SvrHyperparams::default().tolerance)]
    pub svr_tolerance: f64,

    #[arg(long, default_value_t = SvrHyperparams::default().max_passes)]
    pub svr_max_passes: usize,

    /// Also export the harvested (accuracy, change rate) points.
    #[arg(long)]
    pub points_csv: Option<PathBuf>,

    /// Store the measured training time in the model (makes it non-reproducible).
    #[arg(long)]
    pub record_timing: bool,

    #[command(flatten)]
    pub jobs: JobsArg,
}

impl CalibrateArgs {
    pub fn lof(&self) -> LofConfig {
        LofConfig {
            n_neighbors: self.lof_neighbors,
            outliers_fraction: self.outliers_fraction,
        }
    }

    pub fn svr(&self) -> SvrHyperparams {
        SvrHyperparams {
            c: self.svr_c,
            epsilon_tube: self.svr_epsilon,
            gamma: self.svr_gamma,
            tolerance: self.svr_tolerance,
            max_passes: self.svr_max_passes,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, env = "FCMSTOP_MODEL")]
    pub model: PathBuf,

    #[arg(long)]
    pub accuracy: f64,

    /// Images (PNG/PPM) or feature CSVs to classify.
    #[arg(long = "image", required = true, num_args = 1..)]
    pub images: Vec<PathBuf>,

    /// Output path for a single input.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,

    /// Output directory; files are named `<id>_labels.png` (or `.csv`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    #[arg(long)]
    pub header: bool,

    #[command(flatten)]
    pub fcm: FcmArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TimeBasisArg {
    Iterations,
    WallClock,
}

impl From<TimeBasisArg> for TimeBasis {
    fn from(t: TimeBasisArg) -> Self {
        match t {
            TimeBasisArg::Iterations => TimeBasis::Iterations,
            TimeBasisArg::WallClock => TimeBasis::WallClock,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, env = "FCMSTOP_MODEL")]
    pub model: PathBuf,

    #[command(flatten)]
    pub corpus: CorpusArgs,

    /// Directory for report.json, accuracy.csv and time.csv.
    #[arg(long)]
    pub out_dir: PathBuf,

    #[arg(long, value_delimiter = ',', default_values_t = fcmstop_core::DEFAULT_ACCURACY_GRID)]
    pub accuracies: Vec<f64>,

    /// Unit for time fractions. Iteration counts keep reports reproducible.
    #[arg(long, value_enum, default_value_t = TimeBasisArg::Iterations)]
    pub time_basis: TimeBasisArg,

    #[command(flatten)]
    pub fcm: FcmArgs,

    #[command(flatten)]
    pub jobs: JobsArg,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Price per hour of compute.
    #[arg(long, allow_negative_numbers = true)]
    pub unit_price: Option<f64>,

    #[arg(long, default_value = "USD")]
    pub currency: String,

    /// Evaluation report to read per-image times from.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Accuracy level of the report to use (needed when it has several).
    #[arg(long)]
    pub accuracy: Option<f64>,

    /// Seconds per FCM iteration, for reports measured in iterations.
    #[arg(long)]
    pub seconds_per_iteration: Option<f64>,

    /// Model whose recorded training time becomes the training hours.
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Training hours.
    #[arg(long, allow_negative_numbers = true)]
    pub t_train: Option<f64>,

    /// Early-stopped clustering hours.
    #[arg(long, allow_negative_numbers = true)]
    pub t_actual: Option<f64>,

    /// Fully converged clustering hours.
    #[arg(long, allow_negative_numbers = true)]
    pub t_total: Option<f64>,

    /// Region to extrapolate savings over, in square kilometres.
    #[arg(long, allow_negative_numbers = true)]
    pub area_km2: Option<f64>,

    /// Ground footprint of one image, in square metres.
    #[arg(long, allow_negative_numbers = true)]
    pub image_area_m2: Option<f64>,

    /// Saved hours per image; derived from the report when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub saved_hours_per_image: Option<f64>,

    /// Also write the cost report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 10)]
    pub count: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// File name prefix; ids are `<prefix><index>`.
    #[arg(long, default_value = "scene")]
    pub prefix: String,

    #[arg(long, default_value_t = 64)]
    pub width: u32,

    #[arg(long, default_value_t = 64)]
    pub height: u32,

    #[arg(long)]
    pub noise: Option<f64>,

    #[arg(long)]
    pub shading: Option<f64>,

    /// Also write each scene's ground-truth region map as a label PNG.
    #[arg(long)]
    pub truth: bool,
}
