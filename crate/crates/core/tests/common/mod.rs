//! Independent reference implementations used as test oracles, plus small
//! random-data helpers. Deliberately naive: clarity over speed.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// Rand index straight from the definition: agreeing pairs over all pairs.
pub fn rand_by_definition(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Local Outlier Factor by the textbook definitions, with full sorts.
pub fn brute_lof(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = points.len();
    let d = |i: usize, j: usize| euclid(&points[i], &points[j]);
    let kdist: Vec<f64> = (0..n)
        .map(|i| {
            let mut ds: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d(i, j)).collect();
            ds.sort_by(f64::total_cmp);
            ds[k - 1]
        })
        .collect();
    let hood: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && d(i, j) <= kdist[i]).collect())
        .collect();
    let lrd: Vec<f64> = (0..n)
        .map(|i| {
            let s: f64 = hood[i].iter().map(|&o| kdist[o].max(d(i, o))).sum();
            if s > 0.0 {
                (hood[i].len() as f64 / s).min(1e12)
            } else {
                1e12
            }
        })
        .collect();
    (0..n)
        .map(|i| hood[i].iter().map(|&o| lrd[o]).sum::<f64>() / (hood[i].len() as f64 * lrd[i]))
        .collect()
}

/// Minimum of the epsilon-SVR dual in the split variables `(a, a*)` with
/// accelerated projected gradient. Returns the dual objective
/// `1/2 b'Kb - y'b + eps * sum(a + a*)` with `b = a - a*`.
pub fn svr_dual_projected_gradient(kernel: &[f64], ys: &[f64], c: f64, eps: f64, iters: usize) -> f64 {
    let n = ys.len();
    let kb = |b: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| kernel[i * n + j] * b[j]).sum()).collect() };
    let value = |z: &[f64]| -> f64 {
        let b: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let q = kb(&b);
        0.5 * b.iter().zip(&q).map(|(x, y)| x * y).sum::<f64>() - ys.iter().zip(&b).map(|(y, x)| y * x).sum::<f64>()
            + eps * z.iter().sum::<f64>()
    };
    // Lipschitz bound of the split Hessian [[K, -K], [-K, K]]: 2 * max row sum of |K|.
    let lip = 2.0
        * (0..n)
            .map(|i| (0..n).map(|j| kernel[i * n + j].abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let step = 1.0 / lip.max(1e-12);
    let project = |v: &[f64]| -> Vec<f64> {
        // z(l) = clip(v - l*s, 0, c) with s = +1 on a, -1 on a*; find l with
        // sum(a) - sum(a*) = 0. The balance is non-increasing in l.
        let at = |l: f64| -> (Vec<f64>, f64) {
            let z: Vec<f64> = (0..2 * n)
                .map(|i| {
                    let s = if i < n { 1.0 } else { -1.0 };
                    (v[i] - l * s).clamp(0.0, c)
                })
                .collect();
            let bal = z[..n].iter().sum::<f64>() - z[n..].iter().sum::<f64>();
            (z, bal)
        };
        let (mut lo, mut hi) = (-1e3 - c, 1e3 + c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi)).0
    };
    let grad = |z: &[f64]| -> Vec<f64> {
        let b: Vec<f64> = (0..n).map(|i| z[i] - z[n + i]).collect();
        let q = kb(&b);
        (0..2 * n)
            .map(|i| if i < n { q[i] - ys[i] + eps } else { -q[i - n] + ys[i - n] + eps })
            .collect()
    };
    let mut z = vec![0.0; 2 * n];
    let mut w = z.clone();
    let mut t = 1.0_f64;
    for _ in 0..iters {
        let g = grad(&w);
        let v: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = project(&v);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = next.iter().zip(&z).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        z = next;
        t = t_next;
    }
    value(&z)
}

/// Exhaustive minimum-SSE partition of `xs` into `k` non-empty groups.
pub fn exhaustive_kmeans_1d(xs: &[f64], k: usize) -> Vec<usize> {
    let n = xs.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, labels.clone());
    loop {
        let mut sums = vec![(0.0, 0usize); k];
        for (&x, &l) in xs.iter().zip(&labels) {
            sums[l].0 += x;
            sums[l].1 += 1;
        }
        if sums.iter().all(|s| s.1 > 0) {
            let sse: f64 = xs
                .iter()
                .zip(&labels)
                .map(|(&x, &l)| (x - sums[l].0 / sums[l].1 as f64).powi(2))
                .sum();
            if sse < best.0 {
                best = (sse, labels.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best.1;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}
