//! Software rendering of posed face meshes under SH lighting, background
//! compositing and 8-bit sRGB encoding.

mod background;
mod encode;
mod framebuffer;
mod pipeline;
mod raster;

use std::path::PathBuf;

pub use background::{
    composite_background, procedural_texture, BackgroundChoice, BackgroundSource, CropRect,
    PROCEDURAL_TEXTURE_SIZE,
};
pub use encode::{encode_image, linear_to_srgb8, srgb8_to_linear};
pub use framebuffer::FrameBuffer;
pub use pipeline::{render_face, LightingSpec, PoseSpec, RenderOutput, RenderRecord, Scene};
pub use raster::{
    for_each_covered_pixel, is_front_facing, rasterize, snap, FixedPoint, RasterStats,
    SUBPIXEL_BITS, SUBPIXEL_SCALE,
};

use crate::camera::CameraError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("frame buffer is {}x{} but the camera expects {}x{}", frame.0, frame.1, camera.0, camera.1)]
    FrameSize {
        frame: (u32, u32),
        camera: (u32, u32),
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
