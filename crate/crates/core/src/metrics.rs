//! Rand Index between hard partitions, and per-iteration accuracy traces.

use std::collections::HashMap;

use crate::clustering::ClusterTrace;
use crate::error::{Error, Result};

/// Pair agreement counts between two partitions of the same `n` points.
///
/// `m11`: same cluster in both; `m00`: different clusters in both;
/// `m01`: same in the first only; `m10`: same in the second only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub m00: u64,
    pub m01: u64,
    pub m10: u64,
    pub m11: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.m00 + self.m01 + self.m10 + self.m11
    }

    pub fn rand_index(&self) -> f64 {
        (self.m00 + self.m11) as f64 / self.total() as f64
    }
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "partition lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::input("Rand Index needs at least 2 labeled points"));
    }
    Ok(a.len() as u64)
}

/// Counts every one of the `n(n-1)/2` pairs explicitly.
pub fn pair_counts(a: &[usize], b: &[usize]) -> Result<PairCounts> {
    check_lengths(a, b)?;
    let mut counts = PairCounts::default();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => counts.m11 += 1,
                (false, false) => counts.m00 += 1,
                (true, false) => counts.m01 += 1,
                (false, true) => counts.m10 += 1,
            }
        }
    }
    Ok(counts)
}

/// Rand Index by pair enumeration. Quadratic; intended for small `n`.
pub fn rand_index_pairwise(a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(pair_counts(a, b)?.rand_index())
}

#[inline]
fn choose2(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Rand Index from the contingency table of the two partitions.
///
/// The agreeing-pair count is computed in exact integer arithmetic, so the
/// result is bit-identical to [`rand_index_pairwise`].
pub fn rand_index_contingency(a: &[usize], b: &[usize]) -> Result<f64> {
    let n = check_lengths(a, b)?;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let same_both: u128 = joint.values().map(|&c| choose2(c)).sum();
    let same_a: u128 = rows.values().map(|&c| choose2(c)).sum();
    let same_b: u128 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    // m11 + m00 = total + 2*m11 - (m11 + m01) - (m11 + m10)
    let agree = total + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / total as f64)
}

/// Accuracy `r_m` of every iteration against the final partition.
pub fn accuracy_trace(trace: &ClusterTrace) -> Result<Vec<f64>> {
    if trace.n_iterations() < 2 || trace.labels.len() != trace.n_iterations() {
        return Err(Error::input(format!(
            "accuracy trace needs at least 2 labeled iterations, got {}",
            trace.labels.len()
        )));
    }
    let reference = trace.labels.last().expect("non-empty");
    let last = trace.labels.len() - 1;
    trace
        .labels
        .iter()
        .enumerate()
        .map(|(m, labels)| {
            if m == last {
                Ok(1.0)
            } else {
                rand_index_contingency(labels, reference)
            }
        })
        .collect()
}
