use image::RgbImage;

use super::framebuffer::FrameBuffer;

/// sRGB transfer of a linear value clamped to `[0, 1]`, rounded half up to
/// 8 bits.
#[inline]
pub fn linear_to_srgb8(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    let s = if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Inverse sRGB transfer of an 8-bit value.
#[inline]
pub fn srgb8_to_linear(v: u8) -> f64 {
    let c = f64::from(v) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Encode the color plane as 8-bit sRGB.
pub fn encode_image(fb: &FrameBuffer) -> RgbImage {
    let mut img = RgbImage::new(fb.width(), fb.height());
    for (px, c) in img.pixels_mut().zip(&fb.color) {
        px.0 = c.map(linear_to_srgb8);
    }
    img
}
