use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, RgbImage};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::annotation::{
    annotation_path, image_path, DatasetManifest, DatasetTotals, ManifestRecord, SampleAnnotation,
    GENERATOR_VERSION, MANIFEST_FILE,
};
use super::config::{BackgroundSpec, GenerationConfig, ModelSource, PriorSource};
use super::DatasetError;
use crate::camera::PinholeCamera;
use crate::fsutil::write_atomic;
use crate::illumination::{load_prior, IlluminationPrior};
use crate::model::{
    build_toy_model, load_model, sample_coeffs, FaceInstanceParams, MorphableFaceModel,
    ToyModelSpec,
};
use crate::render::{render_face, BackgroundSource, LightingSpec, PoseSpec, Scene};
use crate::stream::derive_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub threads: usize,
    /// Keep existing, intact image/annotation pairs instead of re-rendering.
    pub resume: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            resume: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    pub rendered: usize,
    pub reused: usize,
}

/// Model, prior, backgrounds and camera resolved from a config.
#[derive(Debug, Clone)]
pub struct GenerationAssets {
    pub model: MorphableFaceModel,
    pub prior: IlluminationPrior,
    pub background: BackgroundSource,
    pub camera: PinholeCamera,
}

impl GenerationAssets {
    pub fn load(config: &GenerationConfig) -> Result<Self, DatasetError> {
        let model = match &config.model {
            ModelSource::Toy(seed) => build_toy_model(&ToyModelSpec::with_seed(*seed))?,
            ModelSource::File(path) => load_model(path)?,
        };
        let mut prior = match &config.prior {
            PriorSource::Builtin => IlluminationPrior::builtin(),
            PriorSource::File(path) => load_prior(path)?,
        };
        if let Some(j) = config.illumination_jitter {
            prior = prior.with_jitter(j)?;
        }
        let background = match &config.backgrounds {
            BackgroundSpec::Procedural => BackgroundSource::Procedural,
            BackgroundSpec::Directory(dir) => BackgroundSource::from_dir(dir)?,
        };
        Ok(Self {
            model,
            prior,
            background,
            camera: config.camera()?,
        })
    }

    fn scene(&self, config: &GenerationConfig) -> Scene<'_> {
        Scene {
            model: &self.model,
            background: &self.background,
            camera: self.camera,
            fill_fraction: config.fill_fraction,
        }
    }
}

/// Shape and color coefficients of identity `identity`.
pub fn identity_params(
    config: &GenerationConfig,
    model: &MorphableFaceModel,
    identity: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = derive_stream(config.master_seed, "id", &[identity as u64]);
    let shape = sample_coeffs(&mut rng, model.shape().component_count(), config.truncation);
    let color = sample_coeffs(&mut rng, model.color().component_count(), config.truncation);
    (shape, color)
}

/// Render image `sample` of an identity. Depends only on the config, the
/// assets and the two indices.
pub fn render_sample(
    config: &GenerationConfig,
    assets: &GenerationAssets,
    identity_coeffs: &(Vec<f64>, Vec<f64>),
    identity: usize,
    sample: usize,
) -> Result<(RgbImage, SampleAnnotation), DatasetError> {
    let mut rng = derive_stream(
        config.master_seed,
        "sample",
        &[identity as u64, sample as u64],
    );
    let expression = sample_coeffs(
        &mut rng,
        assets.model.expression().component_count(),
        config.truncation,
    );
    let params = FaceInstanceParams {
        shape_coeffs: identity_coeffs.0.clone(),
        color_coeffs: identity_coeffs.1.clone(),
        expression_coeffs: expression,
    };
    let out = render_face(
        &assets.scene(config),
        &params,
        PoseSpec::Sample(config.pose_ranges),
        LightingSpec::Prior(&assets.prior),
        &mut rng,
    )?;
    let r = out.record;
    let annotation = SampleAnnotation {
        generator_version: GENERATOR_VERSION.to_string(),
        identity_id: identity,
        sample_id: sample,
        image: slash_path(&image_path(identity, sample)),
        shape_coeffs: params.shape_coeffs,
        color_coeffs: params.color_coeffs,
        expression_coeffs: params.expression_coeffs,
        yaw: r.yaw,
        pitch: r.pitch,
        roll: r.roll,
        rotation: r.rotation,
        translation: r.translation,
        illumination: r.illumination,
        background: r.background,
    };
    Ok((out.image, annotation))
}

pub(crate) fn slash_path(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn encode_png(image: &RgbImage, path: &Path) -> Result<Vec<u8>, DatasetError> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf)
        .write_image(
            image.as_raw(),
            image.width(),
            image.height(),
            ExtendedColorType::Rgb8,
        )
        .map_err(|source| DatasetError::Encode {
            path: path.to_owned(),
            source,
        })?;
    Ok(buf)
}

/// Existing pair from an earlier run, if both files are present and the
/// annotation belongs to this slot.
fn reuse_existing(
    image_file: &Path,
    annotation_file: &Path,
    identity: usize,
    sample: usize,
) -> Option<(String, String)> {
    let image = std::fs::read(image_file).ok()?;
    let annotation = std::fs::read(annotation_file).ok()?;
    let parsed: SampleAnnotation = serde_json::from_slice(&annotation).ok()?;
    if parsed.identity_id != identity || parsed.sample_id != sample {
        return None;
    }
    image::load_from_memory_with_format(&image, image::ImageFormat::Png).ok()?;
    Some((sha256_hex(&image), sha256_hex(&annotation)))
}

enum Outcome {
    Rendered(ManifestRecord),
    Reused(ManifestRecord),
}

/// Generate every image and annotation of `config` under `out_dir`, then
/// write the manifest.
///
/// Output bytes do not depend on `options.threads`: every image draws from
/// its own random stream and records are collected in index order.
pub fn generate_dataset(
    config: &GenerationConfig,
    out_dir: &Path,
    options: &GenerateOptions,
) -> Result<GenerationReport, DatasetError> {
    config.validate()?;
    let assets = GenerationAssets::load(config)?;
    std::fs::create_dir_all(out_dir).map_err(DatasetError::io(out_dir))?;

    let identities: Vec<(Vec<f64>, Vec<f64>)> = (0..config.identity_count)
        .map(|j| identity_params(config, &assets.model, j))
        .collect();
    for j in 0..config.identity_count {
        let dir = out_dir.join(format!("id_{j:05}"));
        std::fs::create_dir_all(&dir).map_err(DatasetError::io(&dir))?;
    }

    let total = config.total_images();
    let done = AtomicUsize::new(0);
    let step = (total / 10).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.max(1))
        .build()
        .map_err(|e| DatasetError::ThreadPool(e.to_string()))?;

    let task = |k: usize| -> Result<Outcome, DatasetError> {
        let (j, i) = (
            k / config.samples_per_identity,
            k % config.samples_per_identity,
        );
        let image_rel = image_path(j, i);
        let annotation_rel = annotation_path(j, i);
        let image_file = out_dir.join(&image_rel);
        let annotation_file = out_dir.join(&annotation_rel);
        let record = |image_sha256, annotation_sha256| ManifestRecord {
            identity_id: j,
            sample_id: i,
            image: slash_path(&image_rel),
            annotation: slash_path(&annotation_rel),
            image_sha256,
            annotation_sha256,
        };
        let outcome = match options
            .resume
            .then(|| reuse_existing(&image_file, &annotation_file, j, i))
            .flatten()
        {
            Some((img_sha, ann_sha)) => Outcome::Reused(record(img_sha, ann_sha)),
            None => {
                let (image, annotation) = render_sample(config, &assets, &identities[j], j, i)?;
                let png = encode_png(&image, &image_file)?;
                let mut json = serde_json::to_vec_pretty(&annotation).map_err(|source| {
                    DatasetError::Json {
                        path: annotation_file.clone(),
                        source,
                    }
                })?;
                json.push(b'\n');
                write_atomic(&image_file, &png).map_err(DatasetError::io(&image_file))?;
                write_atomic(&annotation_file, &json)
                    .map_err(DatasetError::io(&annotation_file))?;
                Outcome::Rendered(record(sha256_hex(&png), sha256_hex(&json)))
            }
        };
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if n.is_multiple_of(step) || n == total {
            log::info!("{n}/{total} images");
        }
        Ok(outcome)
    };
    let outcomes: Vec<Outcome> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(task)
            .collect::<Result<_, _>>()
    })?;

    let (mut rendered, mut reused) = (0, 0);
    let records = outcomes
        .into_iter()
        .map(|o| match o {
            Outcome::Rendered(r) => {
                rendered += 1;
                r
            }
            Outcome::Reused(r) => {
                reused += 1;
                r
            }
        })
        .collect();
    let manifest = DatasetManifest {
        generator_version: GENERATOR_VERSION.to_string(),
        config: config.clone(),
        totals: DatasetTotals {
            identities: config.identity_count,
            samples_per_identity: config.samples_per_identity,
            images: total,
        },
        records,
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|source| DatasetError::Json {
        path: manifest_path.clone(),
        source,
    })?;
    bytes.push(b'\n');
    write_atomic(&manifest_path, &bytes).map_err(DatasetError::io(&manifest_path))?;
    log::info!(
        "rendered {rendered}, reused {reused}, manifest {}",
        manifest_path.display()
    );
    Ok(GenerationReport {
        manifest,
        manifest_path,
        rendered,
        reused,
    })
}
