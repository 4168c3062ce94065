//! Local Outlier Factor scoring and fraction-based outlier removal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local reachability density assigned when every reachability distance is 0.
pub const LRD_CAP: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LofConfig {
    pub n_neighbors: usize,
    pub outliers_fraction: f64,
}

impl Default for LofConfig {
    fn default() -> Self {
        Self {
            n_neighbors: 40,
            outliers_fraction: 0.03,
        }
    }
}

impl LofConfig {
    pub fn validate(&self, n_points: usize) -> Result<()> {
        if self.n_neighbors < 1 || self.n_neighbors >= n_points {
            return Err(Error::config(format!(
                "n_neighbors must lie in [1, {n_points}), got {}",
                self.n_neighbors
            )));
        }
        if !(self.outliers_fraction > 0.0 && self.outliers_fraction < 1.0) {
            return Err(Error::config(format!(
                "outliers_fraction must lie in (0, 1), got {}",
                self.outliers_fraction
            )));
        }
        Ok(())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// LOF score of every point using exact pairwise distances.
///
/// The k-distance neighborhood of a point contains every other point within
/// its k-distance, so ties at the k-th distance are all included.
pub fn lof_scores<P: AsRef<[f64]>>(points: &[P], k: usize) -> Result<Vec<f64>> {
    let n = points.len();
    if k < 1 || k >= n {
        return Err(Error::input(format!(
            "LOF needs 1 <= k < number of points (k = {k}, n = {n})"
        )));
    }
    let dims = points[0].as_ref().len();
    if points.iter().any(|p| p.as_ref().len() != dims) {
        return Err(Error::input("LOF points have unequal dimensions"));
    }
    if points.iter().flat_map(|p| p.as_ref()).any(|v| !v.is_finite()) {
        return Err(Error::input("LOF points must be finite"));
    }

    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(points[i].as_ref(), points[j].as_ref());
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    let mut k_distance = vec![0.0; n];
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(n - 1);
    for i in 0..n {
        let row = &dist[i * n..(i + 1) * n];
        scratch.clear();
        scratch.extend((0..n).filter(|&j| j != i).map(|j| row[j]));
        let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
        let kd = *kth;
        k_distance[i] = kd;
        neighbors.push((0..n).filter(|&j| j != i && row[j] <= kd).collect());
    }

    let lrd: Vec<f64> = (0..n)
        .map(|i| {
            let reach: f64 = neighbors[i]
                .iter()
                .map(|&o| k_distance[o].max(dist[i * n + o]))
                .sum();
            if reach > 0.0 {
                (neighbors[i].len() as f64 / reach).min(LRD_CAP)
            } else {
                LRD_CAP
            }
        })
        .collect();

    Ok((0..n)
        .map(|i| {
            let ratio_sum: f64 = neighbors[i].iter().map(|&o| lrd[o] / lrd[i]).sum();
            ratio_sum / neighbors[i].len() as f64
        })
        .collect())
}

/// Number of points removed for a given fraction: `ceil(fraction * n)`.
pub fn removal_count(n: usize, fraction: f64) -> usize {
    // Absorb representation error, e.g. 0.07 * 100 = 7.000000000000001.
    (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Drops the `ceil(fraction * n)` highest-scoring points.
///
/// Ties in score remove the lower index first. Returns the kept points in
/// input order and the removed indices in ascending order.
pub fn remove_outliers<T: Clone>(points: &[T], scores: &[f64], fraction: f64) -> Result<(Vec<T>, Vec<usize>)> {
    if points.len() != scores.len() {
        return Err(Error::input(format!(
            "{} points but {} scores",
            points.len(),
            scores.len()
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::input(format!("outlier fraction must lie in (0, 1), got {fraction}")));
    }
    let count = removal_count(points.len(), fraction);
    if count >= points.len() {
        return Err(Error::input(format!(
            "fraction {fraction} would remove all {} points",
            points.len()
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut removed = order[..count].to_vec();
    removed.sort_unstable();

    let mut drop = vec![false; points.len()];
    removed.iter().for_each(|&i| drop[i] = true);
    let kept = points
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(p, _)| p.clone())
        .collect();
    Ok((kept, removed))
}
