//! Seeded synthetic data: six-region land-cover-like RGB scenes and Gaussian
//! blobs, for demos, benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::CorpusImage;
use crate::clustering::FeatureMatrix;
use crate::imagery::ImageRecord;

/// Base region colors in `[0, 1]`: water, forest, grassland, bare soil,
/// built-up, sand.
pub const REGION_COLORS: [[f64; 3]; 6] = [
    [0.15, 0.25, 0.45],
    [0.15, 0.40, 0.18],
    [0.45, 0.62, 0.30],
    [0.55, 0.42, 0.30],
    [0.60, 0.60, 0.62],
    [0.85, 0.80, 0.62],
];

#[derive(Clone, Debug, PartialEq)]
pub struct SceneParams {
    pub width: u32,
    pub height: u32,
    /// Per-channel Gaussian pixel noise.
    pub noise_std: f64,
    /// Uniform per-image shift applied to each region color.
    pub color_jitter: f64,
    /// Peak relative brightness change of a linear illumination gradient
    /// across each region.
    pub shading: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            noise_std: 0.2,
            color_jitter: 0.06,
            shading: 0.3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub record: ImageRecord,
    /// 8-bit RGB pixels, row-major.
    pub rgb: Vec<u8>,
    /// Region index of every pixel.
    pub truth: Vec<usize>,
}

/// A scene split into six Voronoi regions, each with its own color plus
/// pixel noise. Pixels are quantized to 8 bits so the features match what
/// loading the saved image would produce.
pub fn six_region_scene(id: &str, seed: u64, params: &SceneParams) -> SyntheticScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width as usize, params.height as usize);
    let sites: Vec<(f64, f64)> = (0..REGION_COLORS.len())
        .map(|_| (rng.random::<f64>() * w as f64, rng.random::<f64>() * h as f64))
        .collect();
    let colors: Vec<[f64; 3]> = REGION_COLORS
        .iter()
        .map(|c| c.map(|v| v + params.color_jitter * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    let gradients: Vec<(f64, f64)> = (0..REGION_COLORS.len())
        .map(|_| {
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            (angle.cos(), angle.sin())
        })
        .collect();
    let noise = Normal::new(0.0, params.noise_std.max(0.0)).expect("valid std");

    let mut rgb = Vec::with_capacity(w * h * 3);
    let mut truth = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let region = sites
                .iter()
                .enumerate()
                .map(|(i, &(sx, sy))| (i, (px - sx).powi(2) + (py - sy).powi(2)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map_or(0, |(i, _)| i);
            truth.push(region);
            let (gx, gy) = gradients[region];
            let along = (px / w as f64 - 0.5) * gx + (py / h as f64 - 0.5) * gy;
            let brightness = 1.0 + params.shading * 2.0 * along;
            for channel in colors[region] {
                let v = (channel * brightness + noise.sample(&mut rng)).clamp(0.0, 1.0);
                rgb.push((v * 255.0).round() as u8);
            }
        }
    }
    let values = rgb.iter().map(|&c| f64::from(c) / 255.0).collect();
    let features = FeatureMatrix::new(w * h, 3, values).expect("non-empty scene");
    SyntheticScene {
        record: ImageRecord {
            id: id.to_owned(),
            width: params.width,
            height: params.height,
            features,
        },
        rgb,
        truth,
    }
}

/// `count` scenes with ids `{prefix}{index:03}` and seeds derived from `seed`.
pub fn scene_corpus(prefix: &str, count: usize, seed: u64, params: &SceneParams) -> Vec<SyntheticScene> {
    (0..count)
        .map(|i| {
            let scene_seed = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
            six_region_scene(&format!("{prefix}{i:03}"), scene_seed, params)
        })
        .collect()
}

pub fn to_corpus(scenes: &[SyntheticScene]) -> Vec<CorpusImage> {
    scenes
        .iter()
        .map(|s| CorpusImage::new(s.record.id.clone(), s.record.features.clone()))
        .collect()
}

/// Isotropic Gaussian blobs, `per_blob` points around each center, with the
/// generating blob index as ground truth.
pub fn gaussian_blobs(centers: &[Vec<f64>], per_blob: usize, std: f64, seed: u64) -> (FeatureMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, std).expect("valid std");
    let mut rows = Vec::with_capacity(centers.len() * per_blob);
    let mut truth = Vec::with_capacity(centers.len() * per_blob);
    for (k, c) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            rows.push(c.iter().map(|v| v + noise.sample(&mut rng)).collect::<Vec<f64>>());
            truth.push(k);
        }
    }
    (FeatureMatrix::from_rows(&rows).expect("non-empty blobs"), truth)
}
