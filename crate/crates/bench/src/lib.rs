//! Deterministic workloads shared by the benchmarks.

use fcmstop_core::synthetic::{gaussian_blobs, scene_corpus, to_corpus, SceneParams};
use fcmstop_core::{CorpusImage, FeatureMatrix};

/// Pixel features of one synthetic scene of the given side length.
pub fn scene_features(side: u32, seed: u64) -> FeatureMatrix {
    let params = SceneParams { width: side, height: side, ..SceneParams::default() };
    let mut corpus = to_corpus(&scene_corpus("bench", 1, seed, &params));
    corpus.remove(0).features
}

/// A small corpus of synthetic scenes for calibration runs.
pub fn scene_set(count: usize, side: u32, seed: u64) -> Vec<CorpusImage> {
    let params = SceneParams { width: side, height: side, ..SceneParams::default() };
    to_corpus(&scene_corpus("bench", count, seed, &params))
}

/// Two labelings of `n` points with three well-separated groups.
pub fn labelings(n: usize) -> (Vec<usize>, Vec<usize>) {
    let centers = vec![vec![0.0, 0.0], vec![5.0, 0.0], vec![0.0, 5.0]];
    let (_, truth) = gaussian_blobs(&centers, n / 3, 1.5, 7);
    let shifted = truth.iter().enumerate().map(|(i, &l)| if i % 17 == 0 { (l + 1) % 3 } else { l }).collect();
    (truth, shifted)
}

/// `n` points in the plane with a few far-away stragglers.
pub fn planar_points(n: usize) -> Vec<Vec<f64>> {
    let centers = vec![vec![0.0, 0.0], vec![4.0, 4.0]];
    let (x, _) = gaussian_blobs(&centers, n / 2, 1.0, 11);
    let mut pts: Vec<Vec<f64>> = x.rows().map(<[f64]>::to_vec).collect();
    for (i, p) in pts.iter_mut().enumerate().step_by(50) {
        p[0] += 20.0 + i as f64;
    }
    pts
}

/// A noisy sampled curve for regression fits.
pub fn curve(n: usize) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let ys = xs.iter().enumerate().map(|(i, x)| (6.0 * x).sin() + 0.05 * ((i * 7919 % 101) as f64 / 101.0 - 0.5)).collect();
    (xs, ys)
}
