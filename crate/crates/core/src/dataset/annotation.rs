use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::GenerationConfig;
use crate::illumination::SphericalHarmonicsLighting;
use crate::render::BackgroundChoice;

pub const GENERATOR_VERSION: &str = concat!("facesynth ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST_FILE: &str = "manifest.json";

/// Image path relative to the dataset root, `id_<j>/img_<i>.png`.
pub fn image_path(identity: usize, sample: usize) -> PathBuf {
    PathBuf::from(format!("id_{identity:05}/img_{sample:03}.png"))
}

pub fn annotation_path(identity: usize, sample: usize) -> PathBuf {
    PathBuf::from(format!("id_{identity:05}/img_{sample:03}.json"))
}

/// Per-image ground truth. Angles are in radians, the rotation is row-major
/// and the translation is in millimetres in camera space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleAnnotation {
    pub generator_version: String,
    pub identity_id: usize,
    pub sample_id: usize,
    pub image: String,
    pub shape_coeffs: Vec<f64>,
    pub color_coeffs: Vec<f64>,
    pub expression_coeffs: Vec<f64>,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// 27 values, channel-major `[R:9][G:9][B:9]`.
    pub illumination: SphericalHarmonicsLighting,
    pub background: BackgroundChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub identity_id: usize,
    pub sample_id: usize,
    pub image: String,
    pub annotation: String,
    pub image_sha256: String,
    pub annotation_sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetTotals {
    pub identities: usize,
    pub samples_per_identity: usize,
    pub images: usize,
}

/// Written last; its presence marks a complete dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub generator_version: String,
    pub config: GenerationConfig,
    pub totals: DatasetTotals,
    pub records: Vec<ManifestRecord>,
}
