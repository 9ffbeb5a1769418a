//! Background textures: a directory of raster images or seeded procedural
//! noise, randomly cropped and scaled to the frame.

use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encode::srgb8_to_linear;
use super::framebuffer::FrameBuffer;
use super::RenderError;

/// Side length of generated procedural textures.
pub const PROCEDURAL_TEXTURE_SIZE: u32 = 256;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Which texture filled the background, and the region used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundChoice {
    /// `dir:<index>:<file name>` or `procedural:<seed as 16 hex digits>`.
    pub id: String,
    pub crop: CropRect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSource {
    /// Image files, sorted lexicographically by path.
    Directory {
        root: PathBuf,
        files: Vec<PathBuf>,
    },
    Procedural,
}

impl BackgroundSource {
    /// Enumerate the PNG/JPEG files directly inside `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, RenderError> {
        let io_err = |source| RenderError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut files = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            let is_image = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
            if is_image && path.is_file() {
                files.push(path);
            }
        }
        files.sort();
        if files.is_empty() {
            log::warn!(
                "no PNG/JPEG files in {}; using procedural backgrounds",
                dir.display()
            );
            return Ok(Self::Procedural);
        }
        Ok(Self::Directory {
            root: dir.to_owned(),
            files,
        })
    }

    /// Pick a texture, crop and scale it to `width × height`.
    ///
    /// Unreadable files are skipped with a warning in favour of the next
    /// file; if none can be read a procedural texture is used.
    pub fn sample_texture<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        width: u32,
        height: u32,
    ) -> (RgbImage, BackgroundChoice) {
        if let Self::Directory { files, .. } = self {
            let start = rng.random_range(0..files.len());
            for k in 0..files.len() {
                let index = (start + k) % files.len();
                match image::open(&files[index]) {
                    Ok(img) => {
                        let name = files[index]
                            .file_name()
                            .map(|n| n.to_string_lossy().into_owned())
                            .unwrap_or_default();
                        let id = format!("dir:{index}:{name}");
                        return crop_and_scale(&img.to_rgb8(), id, rng, width, height);
                    }
                    Err(e) => log::warn!("skipping background {}: {e}", files[index].display()),
                }
            }
            log::warn!("no readable background image; falling back to procedural texture");
        }
        let seed = rng.next_u64();
        let texture = procedural_texture(seed, PROCEDURAL_TEXTURE_SIZE, PROCEDURAL_TEXTURE_SIZE);
        crop_and_scale(
            &texture,
            format!("procedural:{seed:016x}"),
            rng,
            width,
            height,
        )
    }
}

fn crop_and_scale<R: Rng + ?Sized>(
    texture: &RgbImage,
    id: String,
    rng: &mut R,
    width: u32,
    height: u32,
) -> (RgbImage, BackgroundChoice) {
    let (tw, th) = texture.dimensions();
    // Crop at least the frame size where the texture allows, keeping the
    // frame aspect ratio.
    let min_w = width.min(tw);
    let mut cw = rng.random_range(min_w..=tw);
    let mut ch = ((f64::from(cw) * f64::from(height) / f64::from(width)).round() as u32).max(1);
    if ch > th {
        ch = th;
        cw = ((f64::from(ch) * f64::from(width) / f64::from(height)).round() as u32).clamp(1, tw);
    }
    let x = rng.random_range(0..=tw - cw);
    let y = rng.random_range(0..=th - ch);
    let crop = imageops::crop_imm(texture, x, y, cw, ch).to_image();
    let scaled = if (cw, ch) == (width, height) {
        crop
    } else {
        imageops::resize(&crop, width, height, FilterType::Triangle)
    };
    let choice = BackgroundChoice {
        id,
        crop: CropRect {
            x,
            y,
            width: cw,
            height: ch,
        },
    };
    (scaled, choice)
}

/// Smooth multi-octave value noise blended between two random colors.
pub fn procedural_texture(seed: u64, width: u32, height: u32) -> RgbImage {
    let mut rng = crate::stream::derive_stream(seed, "procedural-texture", &[]);
    let colors: [[f64; 3]; 2] = [
        [rng.random(), rng.random(), rng.random()],
        [rng.random(), rng.random(), rng.random()],
    ];
    let base_cells = rng.random_range(2..=10usize);
    let octaves: Vec<(usize, Vec<f64>, f64)> = (0..3)
        .map(|o| {
            let cells = base_cells << o;
            let lattice = (0..(cells + 1) * (cells + 1))
                .map(|_| rng.random())
                .collect();
            (cells, lattice, 0.5f64.powi(o))
        })
        .collect();
    let norm: f64 = octaves.iter().map(|o| o.2).sum();
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    RgbImage::from_fn(width, height, |x, y| {
        let (u, v) = (
            (f64::from(x) + 0.5) / f64::from(width),
            (f64::from(y) + 0.5) / f64::from(height),
        );
        let mut n = 0.0;
        for (cells, lattice, weight) in &octaves {
            let (fx, fy) = (u * *cells as f64, v * *cells as f64);
            let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
            let (tx, ty) = (smooth(fx - ix as f64), smooth(fy - iy as f64));
            let at = |i: usize, j: usize| lattice[j * (cells + 1) + i];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bottom = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            n += weight * (top * (1.0 - ty) + bottom * ty);
        }
        let n = n / norm;
        Rgb([0, 1, 2].map(|c| {
            let v = colors[0][c] * (1.0 - n) + colors[1][c] * n;
            (v * 255.0).round().clamp(0.0, 255.0) as u8
        }))
    })
}

/// Fill every uncovered pixel from a sampled background texture. Covered
/// pixels are untouched.
pub fn composite_background<R: Rng + ?Sized>(
    fb: &mut FrameBuffer,
    background: &BackgroundSource,
    rng: &mut R,
) -> BackgroundChoice {
    let (texture, choice) = background.sample_texture(rng, fb.width(), fb.height());
    for (i, px) in texture.pixels().enumerate() {
        if !fb.coverage[i] {
            fb.color[i] = px.0.map(srgb8_to_linear);
        }
    }
    choice
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::encode_image;
    use crate::stream::derive_stream;

    #[test]
    fn zero_coverage_equals_scaled_crop() {
        let mut fb = FrameBuffer::new(40, 30);
        let choice = composite_background(
            &mut fb,
            &BackgroundSource::Procedural,
            &mut derive_stream(1, "bg", &[]),
        );
        let (texture, again) =
            BackgroundSource::Procedural.sample_texture(&mut derive_stream(1, "bg", &[]), 40, 30);
        assert_eq!(choice, again);
        assert_eq!(encode_image(&fb), texture);
        assert!(choice.id.starts_with("procedural:"));
        assert!(choice.crop.width >= 40 && choice.crop.height >= 30);
    }

    #[test]
    fn full_coverage_is_untouched() {
        let mut fb = FrameBuffer::new(8, 8);
        fb.coverage.iter_mut().for_each(|c| *c = true);
        fb.color.iter_mut().for_each(|c| *c = [0.25, 0.5, 0.75]);
        let before = fb.clone();
        let choice = composite_background(
            &mut fb,
            &BackgroundSource::Procedural,
            &mut derive_stream(2, "bg", &[]),
        );
        assert_eq!(fb, before);
        assert!(!choice.id.is_empty());
    }

    #[test]
    fn crop_respects_texture_bounds() {
        let tex = procedural_texture(5, 50, 20);
        for k in 0..200 {
            let mut rng = derive_stream(k, "crop", &[]);
            let (img, c) = crop_and_scale(&tex, "t".into(), &mut rng, 32, 32);
            assert_eq!(img.dimensions(), (32, 32));
            assert!(c.crop.x + c.crop.width <= 50 && c.crop.y + c.crop.height <= 20);
            assert!(c.crop.height >= 1 && c.crop.width >= 1);
        }
    }

    #[test]
    fn procedural_texture_is_seeded() {
        assert_eq!(procedural_texture(9, 16, 16), procedural_texture(9, 16, 16));
        assert_ne!(
            procedural_texture(9, 16, 16),
            procedural_texture(10, 16, 16)
        );
    }
}
