//! Dataset recipes, deterministic parallel generation and verification.

mod annotation;
mod config;
mod generate;
mod verify;

use std::path::PathBuf;

pub use annotation::{
    annotation_path, image_path, DatasetManifest, DatasetTotals, ManifestRecord, SampleAnnotation,
    GENERATOR_VERSION, MANIFEST_FILE,
};
pub use config::{BackgroundSpec, GenerationConfig, ModelSource, Preset, PriorSource};
pub use generate::{
    generate_dataset, identity_params, render_sample, GenerateOptions, GenerationAssets,
    GenerationReport,
};
pub use verify::{verify_dataset, Problem, ProblemKind, VerificationReport};

use crate::illumination::IlluminationError;
use crate::model::ModelError;
use crate::render::RenderError;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Illumination(#[from] IlluminationError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("encoding {}: {source}", path.display())]
    Encode {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("worker pool: {0}")]
    ThreadPool(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| DatasetError::Io { path, source }
    }
}
