use image::RgbImage;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::background::{composite_background, BackgroundChoice, BackgroundSource};
use super::encode::encode_image;
use super::framebuffer::FrameBuffer;
use super::raster::{rasterize, RasterStats};
use super::RenderError;
use crate::camera::{center_face, rotation_from_angles, PinholeCamera, PoseRanges};
use crate::illumination::{IlluminationPrior, SphericalHarmonicsLighting};
use crate::model::{FaceInstanceParams, MorphableFaceModel};

/// Explicit head angles (radians) or ranges to sample them from.
#[derive(Debug, Clone, Copy)]
pub enum PoseSpec {
    Fixed { yaw: f64, pitch: f64, roll: f64 },
    Sample(PoseRanges),
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, Copy)]
pub enum LightingSpec<'a> {
    Fixed(SphericalHarmonicsLighting),
    Prior(&'a IlluminationPrior),
}

/// Shared, immutable rendering assets.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub model: &'a MorphableFaceModel,
    pub background: &'a BackgroundSource,
    pub camera: PinholeCamera,
    pub fill_fraction: f64,
}

/// Every nuisance parameter used for one render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderRecord {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub illumination: SphericalHarmonicsLighting,
    pub background: BackgroundChoice,
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: RgbImage,
    pub record: RenderRecord,
    /// Coverage plane of the face, row-major.
    pub coverage: Vec<bool>,
    pub stats: RasterStats,
}

/// Instantiate, center, rasterize, composite and encode one face image.
///
/// Random draws happen in a fixed order: pose (if sampled), illumination (if
/// drawn from a prior), background.
pub fn render_face<R: Rng + ?Sized>(
    scene: &Scene<'_>,
    params: &FaceInstanceParams,
    pose: PoseSpec,
    lighting: LightingSpec<'_>,
    rng: &mut R,
) -> Result<RenderOutput, RenderError> {
    let mesh = scene.model.instantiate(params)?;
    let (yaw, pitch, roll) = match pose {
        PoseSpec::Fixed { yaw, pitch, roll } => (yaw, pitch, roll),
        PoseSpec::Sample(ranges) => ranges.sample(rng),
    };
    let illumination = match lighting {
        LightingSpec::Fixed(l) => l,
        LightingSpec::Prior(prior) => prior.sample(rng),
    };
    let rotation = rotation_from_angles(yaw, pitch, roll);
    let translation = center_face(&mesh, &scene.camera, &rotation, scene.fill_fraction)?;

    let mut fb = FrameBuffer::new(scene.camera.width, scene.camera.height);
    let stats = rasterize(
        &mesh,
        &rotation,
        &translation,
        &scene.camera,
        &illumination,
        &mut fb,
    )?;
    let coverage = fb.coverage.clone();
    let background = composite_background(&mut fb, scene.background, rng);
    let image = encode_image(&fb);

    let mut rot = [[0.0; 3]; 3];
    for (r, row) in rot.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = rotation[(r, c)];
        }
    }
    Ok(RenderOutput {
        image,
        record: RenderRecord {
            yaw,
            pitch,
            roll,
            rotation: rot,
            translation: [translation.x, translation.y, translation.z],
            illumination,
            background,
        },
        coverage,
        stats,
    })
}
