//! Image and CSV ingestion, label-map export.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::calibration::CorpusImage;
use crate::clustering::FeatureMatrix;
use crate::error::{Error, Result};

/// Fixed display colors; label `i` uses entry `i % 8`.
pub const PALETTE: [[u8; 3]; 8] = [
    [31, 119, 180],
    [44, 160, 44],
    [214, 39, 40],
    [255, 127, 14],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [188, 189, 34],
];

/// An RGB image as a `(width * height) x 3` feature matrix in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub features: FeatureMatrix,
}

impl ImageRecord {
    pub fn into_corpus_image(self) -> CorpusImage {
        CorpusImage::new(self.id, self.features)
    }
}

fn file_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn ingestion(path: &Path, reason: impl ToString) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Loads a PNG or PPM image. Pixels are read row-major, channels divided by
/// 255; alpha is dropped and gray is replicated to three channels.
pub fn load_image_features(path: &Path) -> Result<ImageRecord> {
    let img = image::ImageReader::open(path)
        .map_err(|e| ingestion(path, e))?
        .with_guessed_format()
        .map_err(|e| ingestion(path, e))?
        .decode()
        .map_err(|e| ingestion(path, e))?;
    let rgb = img.to_rgb8();
    let (width, height) = rgb.dimensions();
    let values: Vec<f64> = rgb.as_raw().iter().map(|&c| f64::from(c) / 255.0).collect();
    let features = FeatureMatrix::new(width as usize * height as usize, 3, values).map_err(|e| ingestion(path, e))?;
    Ok(ImageRecord {
        id: file_id(path),
        width,
        height,
        features,
    })
}

/// Parses comma-separated numeric rows. No normalization is applied.
pub fn parse_feature_csv(text: &str, has_header: bool) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    reason: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for cell in record.iter() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line,
                reason: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    reason: format!("non-finite value {cell:?}"),
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::Parse {
        line: 0,
        reason: "no data rows".into(),
    })?;
    FeatureMatrix::new(rows, width, values)
}

pub fn load_feature_csv(path: &Path, has_header: bool) -> Result<FeatureMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| ingestion(path, e))?;
    parse_feature_csv(&text, has_header)
}

/// Writes one row per point with shortest round-trip formatting.
pub fn write_feature_csv(features: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Output(e.to_string()))?;
    for row in features.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-pixel cluster labels with a palette of `n_clusters` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<usize>,
    pub n_clusters: usize,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::input(format!(
                "{} labels for a {width}x{height} image",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            n_clusters,
        })
    }

    pub fn palette(&self) -> Vec<[u8; 3]> {
        (0..self.n_clusters).map(|i| PALETTE[i % PALETTE.len()]).collect()
    }
}

/// Writes 8-bit RGB pixels (row-major) as PNG, or PPM for a `.ppm` path.
pub fn write_rgb_image(path: &Path, width: u32, height: u32, rgb: &[u8]) -> Result<()> {
    if rgb.len() != width as usize * height as usize * 3 {
        return Err(Error::Output(format!(
            "{} bytes do not form a {width}x{height} RGB image",
            rgb.len()
        )));
    }
    image::save_buffer(path, rgb, width, height, image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::Output(format!("{}: {e}", path.display())))
}

/// Writes an 8-bit indexed PNG with one palette entry per cluster.
pub fn write_label_image(map: &LabelMap, path: &Path) -> Result<()> {
    if map.n_clusters == 0 || map.n_clusters > 256 {
        return Err(Error::Output(format!(
            "indexed PNG supports 1..=256 clusters, got {}",
            map.n_clusters
        )));
    }
    if let Some(bad) = map.labels.iter().find(|&&l| l >= map.n_clusters) {
        return Err(Error::Output(format!(
            "label {bad} outside palette of {} entries",
            map.n_clusters
        )));
    }
    let out = |e: png::EncodingError| Error::Output(e.to_string());
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, map.width, map.height);
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(map.palette().concat());
    let mut writer = encoder.write_header().map_err(out)?;
    let data: Vec<u8> = map.labels.iter().map(|&l| l as u8).collect();
    writer.write_image_data(&data).map_err(out)?;
    writer.finish().map_err(out)?;
    Ok(())
}

/// Reads back a label image written by [`write_label_image`].
pub fn read_label_image(path: &Path) -> Result<LabelMap> {
    let file = File::open(path).map_err(|e| ingestion(path, e))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| ingestion(path, e))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Indexed || info.bit_depth != png::BitDepth::Eight {
        return Err(ingestion(path, "not an 8-bit indexed PNG"));
    }
    let n_clusters = info.palette.as_ref().map_or(0, |p| p.len() / 3);
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| ingestion(path, "image too large"))?];
    let frame = reader.next_frame(&mut buf).map_err(|e| ingestion(path, e))?;
    let labels = buf[..frame.buffer_size()].iter().map(|&b| b as usize).collect();
    LabelMap::new(width, height, labels, n_clusters)
}

/// Supported corpus file kinds, by extension.
fn is_supported(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "ppm" | "pnm" | "csv")
    )
}

/// Loads a single corpus file: images via [`load_image_features`], `.csv`
/// via [`load_feature_csv`].
pub fn load_corpus_file(path: &Path, csv_header: bool) -> Result<CorpusImage> {
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let features = load_feature_csv(path, csv_header).map_err(|e| ingestion(path, e))?;
        Ok(CorpusImage::new(file_id(path), features))
    } else {
        Ok(load_image_features(path)?.into_corpus_image())
    }
}

/// Every supported file directly inside `dir`, sorted by file name.
pub fn corpus_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| ingestion(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_file() && is_supported(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads every supported file in `dir`, ordered by id.
pub fn load_corpus_dir(dir: &Path, csv_header: bool) -> Result<Vec<CorpusImage>> {
    let mut corpus = corpus_paths(dir)?
        .iter()
        .map(|p| load_corpus_file(p, csv_header))
        .collect::<Result<Vec<_>>>()?;
    corpus.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = corpus.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(ingestion(dir, format!("duplicate image id {:?}", w[0].id)));
    }
    Ok(corpus)
}
