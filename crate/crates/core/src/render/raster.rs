//! Scanline-free half-space triangle rasterizer.
//!
//! Projected vertices are snapped to a 1/256-pixel grid and every edge
//! function is evaluated exactly in integer arithmetic at pixel centers
//! `(x + 0.5, y + 0.5)`. Ties on an edge follow the top-left rule, so pixels
//! on an edge shared by two triangles are covered exactly once.

use nalgebra::Matrix3;

use super::framebuffer::FrameBuffer;
use super::RenderError;
use crate::camera::{to_camera, PinholeCamera, NEAR_PLANE_MM};
use crate::illumination::SphericalHarmonicsLighting;
use crate::model::{FaceMesh, Vec3};

pub const SUBPIXEL_BITS: u32 = 8;
pub const SUBPIXEL_SCALE: f64 = (1u32 << SUBPIXEL_BITS) as f64;
/// Snapped coordinates beyond this magnitude are rejected to keep edge
/// products inside `i64`.
const MAX_FIXED: i64 = 1 << 29;

/// A projected vertex position on the subpixel grid.
pub type FixedPoint = [i64; 2];

/// Snap a pixel-space position to the subpixel grid (round half away from zero).
pub fn snap(p: [f64; 2]) -> Option<FixedPoint> {
    let x = (p[0] * SUBPIXEL_SCALE).round();
    let y = (p[1] * SUBPIXEL_SCALE).round();
    let limit = MAX_FIXED as f64;
    if x.abs() > limit || y.abs() > limit || x.is_nan() || y.is_nan() {
        return None;
    }
    Some([x as i64, y as i64])
}

#[inline]
fn orient(a: FixedPoint, b: FixedPoint, p: FixedPoint) -> i64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Top or left edge for a triangle with positive `orient` in y-down
/// coordinates.
#[inline]
fn is_top_left(a: FixedPoint, b: FixedPoint) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    dy < 0 || (dy == 0 && dx > 0)
}

#[inline]
fn pixel_center(x: i64, y: i64) -> FixedPoint {
    let half = 1i64 << (SUBPIXEL_BITS - 1);
    [(x << SUBPIXEL_BITS) + half, (y << SUBPIXEL_BITS) + half]
}

/// Whether a snapped triangle faces the camera (clockwise on screen with
/// `v` down, i.e. counter-clockwise with `+y` up).
#[inline]
pub fn is_front_facing(a: FixedPoint, b: FixedPoint, c: FixedPoint) -> bool {
    orient(a, b, c) < 0
}

/// Visit every pixel center covered by the snapped triangle, passing the
/// pixel and its screen-space barycentric weights. Triangles are covered
/// regardless of winding; zero-area triangles cover nothing.
pub fn for_each_covered_pixel(
    tri: [FixedPoint; 3],
    width: u32,
    height: u32,
    mut visit: impl FnMut(u32, u32, [f64; 3]),
) {
    let [a, mut b, mut c] = tri;
    let mut area = orient(a, b, c);
    let swapped = area < 0;
    if swapped {
        std::mem::swap(&mut b, &mut c);
        area = -area;
    }
    if area == 0 {
        return;
    }
    let half = 1i64 << (SUBPIXEL_BITS - 1);
    let min_x = a[0].min(b[0]).min(c[0]);
    let max_x = a[0].max(b[0]).max(c[0]);
    let min_y = a[1].min(b[1]).min(c[1]);
    let max_y = a[1].max(b[1]).max(c[1]);
    // first pixel whose center is >= min, last whose center is <= max
    let x0 = (min_x - half + (1 << SUBPIXEL_BITS) - 1)
        .div_euclid(1 << SUBPIXEL_BITS)
        .max(0);
    let y0 = (min_y - half + (1 << SUBPIXEL_BITS) - 1)
        .div_euclid(1 << SUBPIXEL_BITS)
        .max(0);
    let x1 = (max_x - half)
        .div_euclid(1 << SUBPIXEL_BITS)
        .min(i64::from(width) - 1);
    let y1 = (max_y - half)
        .div_euclid(1 << SUBPIXEL_BITS)
        .min(i64::from(height) - 1);
    if x0 > x1 || y0 > y1 {
        return;
    }
    let tl_bc = is_top_left(b, c);
    let tl_ca = is_top_left(c, a);
    let tl_ab = is_top_left(a, b);
    let inv_area = 1.0 / area as f64;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = pixel_center(x, y);
            let w0 = orient(b, c, p);
            let w1 = orient(c, a, p);
            let w2 = orient(a, b, p);
            let inside = (w0 > 0 || (w0 == 0 && tl_bc))
                && (w1 > 0 || (w1 == 0 && tl_ca))
                && (w2 > 0 || (w2 == 0 && tl_ab));
            if !inside {
                continue;
            }
            let (l0, mut l1, mut l2) = (
                w0 as f64 * inv_area,
                w1 as f64 * inv_area,
                w2 as f64 * inv_area,
            );
            if swapped {
                std::mem::swap(&mut l1, &mut l2);
            }
            visit(x as u32, y as u32, [l0, l1, l2]);
        }
    }
}

/// Counters reported by [`rasterize`].
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct RasterStats {
    pub triangles_drawn: usize,
    pub triangles_culled: usize,
    pub triangles_clipped: usize,
    pub fragments_written: usize,
}

struct ProjectedVertex {
    screen: Option<FixedPoint>,
    depth: f64,
    normal: Vec3,
    albedo: Vec3,
}

/// Draw `mesh` posed by `rotation`/`translation` into `fb`.
///
/// Triangles with any vertex at or inside the near plane are skipped whole
/// (no clipping); back-facing triangles are culled. Normals and albedo are
/// interpolated perspective-correctly, the normal renormalized, and each
/// fragment nearer than the stored depth is shaded with `lighting`. At equal
/// depth the earlier triangle keeps the pixel.
pub fn rasterize(
    mesh: &FaceMesh,
    rotation: &Matrix3<f64>,
    translation: &Vec3,
    camera: &PinholeCamera,
    lighting: &SphericalHarmonicsLighting,
    fb: &mut FrameBuffer,
) -> Result<RasterStats, RenderError> {
    if fb.width() != camera.width || fb.height() != camera.height {
        return Err(RenderError::FrameSize {
            frame: (fb.width(), fb.height()),
            camera: (camera.width, camera.height),
        });
    }
    let verts: Vec<ProjectedVertex> = mesh
        .positions
        .iter()
        .zip(&mesh.normals)
        .zip(&mesh.colors)
        .map(|((p, n), c)| {
            let q = to_camera(rotation, translation, p);
            let screen = if q.z > NEAR_PLANE_MM {
                snap(camera.project_unchecked(&q))
            } else {
                None
            };
            ProjectedVertex {
                screen,
                depth: q.z,
                normal: rotation * n,
                albedo: c.map(|v| v.clamp(0.0, 1.0)),
            }
        })
        .collect();

    let mut stats = RasterStats::default();
    let (w, h) = (fb.width(), fb.height());
    for tri in mesh.topology.triangles() {
        let [va, vb, vc] = tri.map(|i| &verts[i as usize]);
        let (Some(a), Some(b), Some(c)) = (va.screen, vb.screen, vc.screen) else {
            stats.triangles_clipped += 1;
            continue;
        };
        if !is_front_facing(a, b, c) {
            stats.triangles_culled += 1;
            continue;
        }
        stats.triangles_drawn += 1;
        let inv_z = [1.0 / va.depth, 1.0 / vb.depth, 1.0 / vc.depth];
        for_each_covered_pixel([a, b, c], w, h, |x, y, l| {
            let m = [l[0] * inv_z[0], l[1] * inv_z[1], l[2] * inv_z[2]];
            let sum = m[0] + m[1] + m[2];
            let depth = 1.0 / sum;
            let idx = fb.index(x, y);
            if !(depth < fb.depth[idx]) {
                return;
            }
            let m = m.map(|v| v / sum);
            let n = va.normal * m[0] + vb.normal * m[1] + vc.normal * m[2];
            let len = n.norm();
            let n = if len > 0.0 { n / len } else { Vec3::z() };
            let albedo = va.albedo * m[0] + vb.albedo * m[1] + vc.albedo * m[2];
            fb.depth[idx] = depth;
            fb.color[idx] = lighting.shade_unchecked([albedo.x, albedo.y, albedo.z], &n);
            fb.coverage[idx] = true;
            stats.fragments_written += 1;
        });
    }
    Ok(stats)
}
