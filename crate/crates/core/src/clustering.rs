//! Fuzzy c-means clustering with full per-iteration tracing.
//!
//! The solver alternates center updates and membership updates and records,
//! for every iteration, the objective value, the hard labels and the elapsed
//! wall-clock time. A caller-supplied predicate can stop the run early.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are treated as coincidence with a center.
const COINCIDENCE_DISTANCE: f64 = 1e-12;
/// Minimum total weight `sum_i u_ij^m` for a cluster to be usable.
const MIN_CLUSTER_WEIGHT: f64 = 1e-300;

/// `n_points x n_dims` matrix of finite feature values, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    n_points: usize,
    n_dims: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_points: usize, n_dims: usize, values: Vec<f64>) -> Result<Self> {
        if n_points == 0 || n_dims == 0 {
            return Err(Error::input(format!(
                "feature matrix must be non-empty (got {n_points}x{n_dims})"
            )));
        }
        if values.len() != n_points * n_dims {
            return Err(Error::input(format!(
                "expected {} values for a {n_points}x{n_dims} matrix, got {}",
                n_points * n_dims,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite feature at row {}, column {}",
                pos / n_dims,
                pos % n_dims
            )));
        }
        Ok(Self {
            n_points,
            n_dims,
            values,
        })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_dims {
                return Err(Error::input(format!(
                    "row {i} has {} columns, expected {n_dims}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_dims, values)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_dims)
    }
}

/// Membership degrees `u_ij`, logically `n_clusters x n_points`.
///
/// Stored point-major so that each point's column is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct Memberships {
    n_clusters: usize,
    n_points: usize,
    values: Vec<f64>,
}

impl Memberships {
    /// Builds memberships from one column (length `n_clusters`) per point.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let n_clusters = columns.first().map_or(0, |c| c.as_ref().len());
        if columns.is_empty() || n_clusters == 0 {
            return Err(Error::input("membership matrix must be non-empty"));
        }
        let mut values = Vec::with_capacity(columns.len() * n_clusters);
        for (i, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != n_clusters {
                return Err(Error::input(format!(
                    "membership column {i} has {} entries, expected {n_clusters}",
                    col.len()
                )));
            }
            values.extend_from_slice(col);
        }
        Ok(Self {
            n_clusters,
            n_points: columns.len(),
            values,
        })
    }

    /// Builds memberships from one row (length `n_points`) per cluster.
    pub fn from_cluster_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_points = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.is_empty() || n_points == 0 {
            return Err(Error::input("membership matrix must be non-empty"));
        }
        if rows.iter().any(|r| r.as_ref().len() != n_points) {
            return Err(Error::input("membership rows have unequal lengths"));
        }
        let columns: Vec<Vec<f64>> = (0..n_points)
            .map(|i| rows.iter().map(|r| r.as_ref()[i]).collect())
            .collect();
        Self::from_columns(&columns)
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn get(&self, cluster: usize, point: usize) -> f64 {
        self.values[point * self.n_clusters + cluster]
    }

    /// Memberships of one point across all clusters.
    pub fn column(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_clusters..(point + 1) * self.n_clusters]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_clusters)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.columns().map(|c| c.iter().sum()).collect()
    }

    /// `max_ij |u_ij - v_ij|`.
    pub fn max_abs_diff(&self, other: &Memberships) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Cluster centers, `n_clusters x n_dims`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Centers {
    n_clusters: usize,
    n_dims: usize,
    values: Vec<f64>,
}

impl Centers {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.is_empty() || n_dims == 0 {
            return Err(Error::input("center matrix must be non-empty"));
        }
        let mut values = Vec::with_capacity(rows.len() * n_dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_dims {
                return Err(Error::input("center rows have unequal lengths"));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            n_clusters: rows.len(),
            n_dims,
            values,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_dims..(j + 1) * self.n_dims]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_dims)
    }
}

/// Parameters of a fuzzy c-means run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    pub n_clusters: usize,
    pub fuzzifier: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        Self {
            n_clusters: 6,
            fuzzifier: 2.0,
            epsilon: 0.005,
            max_iterations: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters < 2 {
            return Err(Error::config(format!(
                "n_clusters must be at least 2, got {}",
                self.n_clusters
            )));
        }
        if !(self.fuzzifier > 1.0 && self.fuzzifier.is_finite()) {
            return Err(Error::config(format!(
                "fuzzifier must be a finite value > 1, got {}",
                self.fuzzifier
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.max_iterations < 2 {
            return Err(Error::config(format!(
                "max_iterations must be at least 2, got {}",
                self.max_iterations
            )));
        }
        Ok(())
    }
}

/// Memberships together with the centers they were computed against.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyState {
    pub memberships: Memberships,
    pub centers: Centers,
}

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Largest membership change fell below epsilon.
    Converged,
    MaxIterations,
    /// The caller's stop predicate fired.
    Predicate,
}

/// Per-iteration record of a run. Iteration `m` (1-based) lives at index `m - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterTrace {
    pub objectives: Vec<f64>,
    pub labels: Vec<Vec<usize>>,
    /// Wall-clock seconds spent in each iteration.
    pub iter_times: Vec<f64>,
    pub stop_reason: StopReason,
}

impl ClusterTrace {
    fn empty() -> Self {
        Self {
            objectives: Vec::new(),
            labels: Vec::new(),
            iter_times: Vec::new(),
            stop_reason: StopReason::MaxIterations,
        }
    }

    pub fn n_iterations(&self) -> usize {
        self.objectives.len()
    }

    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }

    /// Labels after the last recorded iteration.
    pub fn final_labels(&self) -> Option<&[usize]> {
        self.labels.last().map(Vec::as_slice)
    }

    /// Writes `iter,objective,elapsed_seconds` rows to `path` and one
    /// comma-separated label row per iteration to `labels_path`.
    pub fn write_csv(&self, path: &Path, labels_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_output_error)?;
        w.write_record(["iter", "objective", "elapsed_seconds"])
            .map_err(csv_output_error)?;
        for (m, (j, t)) in self.objectives.iter().zip(&self.iter_times).enumerate() {
            w.write_record([(m + 1).to_string(), j.to_string(), t.to_string()])
                .map_err(csv_output_error)?;
        }
        w.flush()?;

        let mut out = BufWriter::new(File::create(labels_path)?);
        for labels in &self.labels {
            let line: Vec<String> = labels.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_output_error(e: csv::Error) -> Error {
    Error::Output(e.to_string())
}

/// Random column-stochastic memberships drawn from a flat Dirichlet.
pub fn init_membership(n_points: usize, n_clusters: usize, seed: u64) -> Result<Memberships> {
    if n_points == 0 {
        return Err(Error::config("n_points must be at least 1"));
    }
    if n_clusters < 2 {
        return Err(Error::config(format!(
            "n_clusters must be at least 2, got {n_clusters}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_points * n_clusters);
    for _ in 0..n_points {
        let start = values.len();
        for _ in 0..n_clusters {
            let draw: f64 = Exp1.sample(&mut rng);
            values.push(draw.max(f64::MIN_POSITIVE));
        }
        let col = &mut values[start..];
        let total: f64 = col.iter().sum();
        col.iter_mut().for_each(|u| *u /= total);
    }
    Ok(Memberships {
        n_clusters,
        n_points,
        values,
    })
}

#[inline]
fn weight(u: f64, fuzzifier: f64) -> f64 {
    if fuzzifier == 2.0 {
        u * u
    } else {
        u.powf(fuzzifier)
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Weighted means `c_j = sum_i u_ij^m x_i / sum_i u_ij^m`.
pub fn compute_centers(
    features: &FeatureMatrix,
    memberships: &Memberships,
    fuzzifier: f64,
) -> Result<Centers> {
    if memberships.n_points != features.n_points {
        return Err(Error::input(format!(
            "memberships cover {} points but features have {}",
            memberships.n_points, features.n_points
        )));
    }
    let (c, d) = (memberships.n_clusters, features.n_dims);
    let mut sums = vec![0.0; c * d];
    let mut weights = vec![0.0; c];
    for (x, col) in features.rows().zip(memberships.columns()) {
        for (j, &u) in col.iter().enumerate() {
            let w = weight(u, fuzzifier);
            weights[j] += w;
            for (s, &xv) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                *s += w * xv;
            }
        }
    }
    for (j, &w) in weights.iter().enumerate() {
        if !(w >= MIN_CLUSTER_WEIGHT) {
            return Err(Error::DegenerateCluster {
                cluster: j,
                weight: w,
            });
        }
        sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= w);
    }
    Ok(Centers {
        n_clusters: c,
        n_dims: d,
        values: sums,
    })
}

/// Fills `out` with the memberships of point `x` and returns its
/// contribution `sum_j u_ij^m ||x - c_j||^2` to the objective.
fn update_point(x: &[f64], centers: &Centers, fuzzifier: f64, out: &mut [f64], d2: &mut [f64]) -> f64 {
    for (dist, c) in d2.iter_mut().zip(centers.iter()) {
        *dist = squared_distance(x, c);
    }
    let coincident = COINCIDENCE_DISTANCE * COINCIDENCE_DISTANCE;
    let n_hits = d2.iter().filter(|&&v| v < coincident).count();
    if n_hits > 0 {
        let share = 1.0 / n_hits as f64;
        for (u, &dist) in out.iter_mut().zip(d2.iter()) {
            *u = if dist < coincident { share } else { 0.0 };
        }
    } else {
        // u_j = (d_min / d_j)^p / sum_k (d_min / d_k)^p with p = 1/(m-1);
        // ratios <= 1 keep the powers bounded.
        let exponent = 1.0 / (fuzzifier - 1.0);
        let d_min = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (u, &dist) in out.iter_mut().zip(d2.iter()) {
            let ratio = d_min / dist;
            *u = if exponent == 1.0 { ratio } else { ratio.powf(exponent) };
            total += *u;
        }
        out.iter_mut().for_each(|u| *u /= total);
    }
    point_objective(out, d2, fuzzifier)
}

#[inline]
fn point_objective(column: &[f64], d2: &[f64], fuzzifier: f64) -> f64 {
    column
        .iter()
        .zip(d2)
        .map(|(&u, &dist)| weight(u, fuzzifier) * dist)
        .sum()
}

/// Memberships plus per-point objective contributions, in point order.
fn update_with_objective(
    features: &FeatureMatrix,
    centers: &Centers,
    fuzzifier: f64,
) -> (Memberships, Vec<f64>) {
    let c = centers.n_clusters;
    let mut values = vec![0.0; features.n_points * c];
    let mut contributions = Vec::with_capacity(features.n_points);
    values
        .par_chunks_mut(c)
        .zip(features.values.par_chunks(features.n_dims))
        .map_init(
            || vec![0.0; c],
            |d2, (out, x)| update_point(x, centers, fuzzifier, out, d2),
        )
        .collect_into_vec(&mut contributions);
    (
        Memberships {
            n_clusters: c,
            n_points: features.n_points,
            values,
        },
        contributions,
    )
}

/// Membership update against fixed centers.
///
/// A point lying within 1e-12 of one or more centers gets its membership
/// split equally among those centers and zero elsewhere.
pub fn update_memberships(features: &FeatureMatrix, centers: &Centers, fuzzifier: f64) -> Memberships {
    update_with_objective(features, centers, fuzzifier).0
}

/// `J = sum_i sum_j u_ij^m ||x_i - c_j||^2`.
pub fn objective(features: &FeatureMatrix, state: &FuzzyState, fuzzifier: f64) -> Result<f64> {
    let mut d2 = vec![0.0; state.centers.n_clusters];
    let mut total = 0.0;
    for (x, col) in features.rows().zip(state.memberships.columns()) {
        for (dist, c) in d2.iter_mut().zip(state.centers.iter()) {
            *dist = squared_distance(x, c);
        }
        total += point_objective(col, &d2, fuzzifier);
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric("objective"))
    }
}

/// Argmax label per point; ties go to the lowest cluster index.
pub fn hard_labels(memberships: &Memberships) -> Vec<usize> {
    memberships
        .columns()
        .map(|col| {
            let mut best = 0;
            for (j, &u) in col.iter().enumerate().skip(1) {
                if u > col[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Step-wise fuzzy c-means driver.
///
/// Each [`step`](FcmSolver::step) computes centers from the current
/// memberships, updates the memberships against those centers, and records
/// the objective of the resulting state.
pub struct FcmSolver<'a> {
    features: &'a FeatureMatrix,
    config: FcmConfig,
    memberships: Memberships,
    centers: Centers,
    trace: ClusterTrace,
}

impl<'a> FcmSolver<'a> {
    pub fn new(features: &'a FeatureMatrix, config: &FcmConfig) -> Result<Self> {
        config.validate()?;
        let memberships = init_membership(features.n_points, config.n_clusters, config.seed)?;
        let centers = compute_centers(features, &memberships, config.fuzzifier)?;
        Ok(Self {
            features,
            config: config.clone(),
            memberships,
            centers,
            trace: ClusterTrace::empty(),
        })
    }

    /// Runs one iteration. Returns the stop reason once the run has
    /// converged or exhausted its iteration budget.
    pub fn step(&mut self) -> Result<Option<StopReason>> {
        let started = Instant::now();
        let fuzzifier = self.config.fuzzifier;
        let centers = compute_centers(self.features, &self.memberships, fuzzifier)?;
        let (memberships, contributions) = update_with_objective(self.features, &centers, fuzzifier);
        let objective: f64 = contributions.iter().sum();
        if !objective.is_finite() {
            return Err(Error::Numeric("objective"));
        }
        let change = memberships.max_abs_diff(&self.memberships);
        let labels = hard_labels(&memberships);
        self.memberships = memberships;
        self.centers = centers;

        self.trace.objectives.push(objective);
        self.trace.labels.push(labels);
        self.trace.iter_times.push(started.elapsed().as_secs_f64());

        if change < self.config.epsilon {
            Ok(Some(StopReason::Converged))
        } else if self.trace.n_iterations() >= self.config.max_iterations {
            Ok(Some(StopReason::MaxIterations))
        } else {
            Ok(None)
        }
    }

    pub fn memberships(&self) -> &Memberships {
        &self.memberships
    }

    pub fn centers(&self) -> &Centers {
        &self.centers
    }

    pub fn trace(&self) -> &ClusterTrace {
        &self.trace
    }

    pub fn finish(self, reason: StopReason) -> (FuzzyState, ClusterTrace) {
        let mut trace = self.trace;
        trace.stop_reason = reason;
        (
            FuzzyState {
                memberships: self.memberships,
                centers: self.centers,
            },
            trace,
        )
    }
}

/// Runs fuzzy c-means to convergence or the iteration cap.
pub fn run_fcm(features: &FeatureMatrix, config: &FcmConfig) -> Result<(FuzzyState, ClusterTrace)> {
    run_fcm_until(features, config, |_| false)
}

/// Runs fuzzy c-means, consulting `stop` after every iteration from the
/// second onward.
pub fn run_fcm_until<F>(
    features: &FeatureMatrix,
    config: &FcmConfig,
    mut stop: F,
) -> Result<(FuzzyState, ClusterTrace)>
where
    F: FnMut(&ClusterTrace) -> bool,
{
    let mut solver = FcmSolver::new(features, config)?;
    loop {
        if let Some(reason) = solver.step()? {
            return Ok(solver.finish(reason));
        }
        if solver.trace().n_iterations() >= 2 && stop(solver.trace()) {
            return Ok(solver.finish(StopReason::Predicate));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(points.len(), 1, points.to_vec()).unwrap()
    }

    #[test]
    fn feature_matrix_rejects_bad_input() {
        assert!(FeatureMatrix::new(0, 1, vec![]).is_err());
        assert!(FeatureMatrix::new(2, 1, vec![1.0]).is_err());
        assert!(FeatureMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn init_single_point() {
        let u = init_membership(1, 2, 42).unwrap();
        assert!((u.column(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(u.column(0).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_membership(50, 4, 9).unwrap();
        let b = init_membership(50, 4, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_membership(50, 4, 10).unwrap());
    }

    #[test]
    fn init_columns_sum_to_one() {
        let u = init_membership(100, 6, 7).unwrap();
        for s in u.column_sums() {
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn init_rejects_bad_dimensions() {
        assert!(matches!(init_membership(0, 3, 1), Err(Error::Config(_))));
        assert!(matches!(init_membership(3, 1, 1), Err(Error::Config(_))));
    }

    #[test]
    fn centers_examples() {
        let x = line(&[0.0, 2.0]);
        let one = Memberships::from_cluster_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(compute_centers(&x, &one, 2.0).unwrap().center(0), &[1.0]);

        let crisp = Memberships::from_cluster_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let c = compute_centers(&x, &crisp, 2.0).unwrap();
        assert_eq!(c.center(0), &[0.0]);
        assert_eq!(c.center(1), &[2.0]);

        let half = Memberships::from_cluster_rows(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(compute_centers(&x, &half, 2.0).unwrap().center(0), &[1.0]);
    }

    #[test]
    fn degenerate_cluster_is_reported() {
        let x = line(&[0.0, 2.0]);
        let u = Memberships::from_cluster_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            compute_centers(&x, &u, 2.0),
            Err(Error::DegenerateCluster { cluster: 1, .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let centers = Centers::from_rows(&[[1.0], [3.0]]).unwrap();
        let u = update_memberships(&line(&[0.0]), &centers, 2.0);
        assert!((u.get(0, 0) - 0.9).abs() < 1e-15);
        assert!((u.get(1, 0) - 0.1).abs() < 1e-15);

        let u = update_memberships(&line(&[2.0]), &centers, 2.0);
        assert_eq!(u.column(0), &[0.5, 0.5]);

        let three = Centers::from_rows(&[[1.0], [3.0], [5.0]]).unwrap();
        let u = update_memberships(&line(&[1.0]), &three, 2.0);
        assert_eq!(u.column(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn coincident_centers_split_membership() {
        let centers = Centers::from_rows(&[[1.0], [1.0], [4.0]]).unwrap();
        let u = update_memberships(&line(&[1.0]), &centers, 2.0);
        assert_eq!(u.column(0), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn objective_examples() {
        let single = FuzzyState {
            memberships: Memberships::from_cluster_rows(&[vec![1.0]]).unwrap(),
            centers: Centers::from_rows(&[[3.0]]).unwrap(),
        };
        assert_eq!(objective(&line(&[3.0]), &single, 2.0).unwrap(), 0.0);

        let state = FuzzyState {
            memberships: Memberships::from_cluster_rows(&[vec![1.0, 1.0]]).unwrap(),
            centers: Centers::from_rows(&[[1.0]]).unwrap(),
        };
        assert_eq!(objective(&line(&[0.0, 2.0]), &state, 2.0).unwrap(), 2.0);

        let scaled = FuzzyState {
            memberships: state.memberships.clone(),
            centers: Centers::from_rows(&[[2.0]]).unwrap(),
        };
        assert_eq!(objective(&line(&[0.0, 4.0]), &scaled, 2.0).unwrap(), 8.0);
    }

    #[test]
    fn labels_argmax_with_low_index_ties() {
        let u = Memberships::from_columns(&[vec![0.6, 0.3, 0.1], vec![0.2, 0.4, 0.4], vec![0.0, 0.0, 1.0]])
            .unwrap();
        assert_eq!(hard_labels(&u), vec![0, 1, 2]);
        let tie = Memberships::from_columns(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(hard_labels(&tie), vec![0]);
    }

    #[test]
    fn config_validation() {
        assert!(FcmConfig::default().validate().is_ok());
        let bad = [
            FcmConfig { n_clusters: 1, ..FcmConfig::default() },
            FcmConfig { fuzzifier: 1.0, ..FcmConfig::default() },
            FcmConfig { epsilon: 0.0, ..FcmConfig::default() },
            FcmConfig { epsilon: 1.0, ..FcmConfig::default() },
            FcmConfig { max_iterations: 1, ..FcmConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn always_stop_predicate_gives_two_iterations() {
        let x = line(&[0.0, 0.1, 5.0, 5.1, 10.0, 10.2]);
        let cfg = FcmConfig { n_clusters: 3, ..FcmConfig::default() };
        let (_, trace) = run_fcm_until(&x, &cfg, |_| true).unwrap();
        assert_eq!(trace.n_iterations(), 2);
        assert_eq!(trace.stop_reason, StopReason::Predicate);
        assert_eq!(trace.labels.len(), 2);
        assert_eq!(trace.iter_times.len(), 2);
    }

    #[test]
    fn final_state_objective_matches_trace() {
        let x = line(&[0.0, 0.3, 0.2, 4.0, 4.4, 9.0, 9.5, 9.1]);
        let cfg = FcmConfig { n_clusters: 3, seed: 3, ..FcmConfig::default() };
        let (state, trace) = run_fcm(&x, &cfg).unwrap();
        assert_eq!(objective(&x, &state, 2.0).unwrap(), *trace.objectives.last().unwrap());
    }

    #[test]
    fn trace_csv_layout() {
        let x = line(&[0.0, 0.1, 5.0, 5.1]);
        let cfg = FcmConfig { n_clusters: 2, ..FcmConfig::default() };
        let (_, trace) = run_fcm(&x, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("trace.csv"), dir.path().join("labels.csv"));
        trace.write_csv(&a, &b).unwrap();
        let text = std::fs::read_to_string(&a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,objective,elapsed_seconds"));
        assert_eq!(lines.count(), trace.n_iterations());
        let labels = std::fs::read_to_string(&b).unwrap();
        assert_eq!(labels.lines().count(), trace.n_iterations());
        assert_eq!(labels.lines().next().unwrap().split(',').count(), 4);
    }
}
