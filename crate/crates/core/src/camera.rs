//! Head pose, pinhole projection and head-centering.
//!
//! Model frame: right-handed, `+y` up, `+x` towards the subject's left, `+z`
//! out of the face. Camera frame: `+x` right, `+y` up, `+z` away from the
//! camera, so a model point maps to camera coordinates as
//! `p_cam = F · R · p + t` with `F = diag(1, 1, -1)`; at `R = I` the face
//! looks straight into the camera and the image is not mirrored.

use nalgebra::Matrix3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{FaceMesh, Vec3};

/// Points must stay strictly beyond this depth (mm) to be rendered.
pub const NEAR_PLANE_MM: f64 = 10.0;
pub const DEFAULT_FILL_FRACTION: f64 = 0.65;
pub const DEFAULT_IMAGE_SIZE: u32 = 128;
/// Default focal length per pixel of image height: a 250 mm head at 1 m
/// covers 65% of the frame.
pub const FOCAL_PER_IMAGE_HEIGHT: f64 = DEFAULT_FILL_FRACTION * 1000.0 / 250.0;

const CENTERING_MAX_ITERATIONS: usize = 32;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CameraError {
    #[error("focal length {0} must be positive and finite")]
    InvalidFocal(f64),
    #[error("image size {0}x{1} must be non-zero")]
    EmptyImage(u32, u32),
    #[error("principal point ({0}, {1}) lies outside the image")]
    PrincipalPointOutside(f64, f64),
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("fill fraction {0} must lie in (0, 1)")]
    InvalidFill(f64),
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("mesh projects to a degenerate extent; framing scale undefined")]
    DegenerateExtent,
    #[error("framing would place geometry at z = {0:.3} mm, inside the near plane")]
    NearPlane(f64),
    #[error("invalid angle range [{low}, {high}] degrees")]
    InvalidRange { low: f64, high: f64 },
}

/// `Rz(roll) · Rx(pitch) · Ry(yaw)`, angles in radians.
pub fn rotation_from_angles(yaw: f64, pitch: f64, roll: f64) -> Matrix3<f64> {
    let (sy, cy) = yaw.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let ry = Matrix3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cp, -sp, 0.0, sp, cp);
    let rz = Matrix3::new(cr, -sr, 0.0, sr, cr, 0.0, 0.0, 0.0, 1.0);
    rz * rx * ry
}

/// Model point to camera coordinates.
#[inline]
pub fn to_camera(rotation: &Matrix3<f64>, translation: &Vec3, p: &Vec3) -> Vec3 {
    let r = rotation * p;
    Vec3::new(
        r.x + translation.x,
        r.y + translation.y,
        translation.z - r.z,
    )
}

/// Six pose parameters: angles in radians, translation in camera millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPose {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub translation: Vec3,
}

impl RigidPose {
    pub fn rotation(&self) -> Matrix3<f64> {
        rotation_from_angles(self.yaw, self.pitch, self.roll)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinholeCamera {
    pub focal_px: f64,
    pub principal_point: [f64; 2],
    pub width: u32,
    pub height: u32,
}

impl PinholeCamera {
    pub fn new(
        focal_px: f64,
        principal_point: [f64; 2],
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        if !(focal_px.is_finite() && focal_px > 0.0) {
            return Err(CameraError::InvalidFocal(focal_px));
        }
        if width == 0 || height == 0 {
            return Err(CameraError::EmptyImage(width, height));
        }
        let [px, py] = principal_point;
        if !(0.0..=f64::from(width)).contains(&px) || !(0.0..=f64::from(height)).contains(&py) {
            return Err(CameraError::PrincipalPointOutside(px, py));
        }
        Ok(Self {
            focal_px,
            principal_point,
            width,
            height,
        })
    }

    /// Centered principal point and the default focal length for the size.
    pub fn default_for(width: u32, height: u32) -> Result<Self, CameraError> {
        Self::new(
            FOCAL_PER_IMAGE_HEIGHT * f64::from(height),
            [f64::from(width) / 2.0, f64::from(height) / 2.0],
            width,
            height,
        )
    }

    /// `principal + focal · (x/z, -y/z)`; `v` grows downwards.
    pub fn project(&self, p: &Vec3) -> Result<[f64; 2], CameraError> {
        if p.z <= 0.0 || p.z.is_nan() {
            return Err(CameraError::BehindCamera(p.z));
        }
        Ok(self.project_unchecked(p))
    }

    #[inline]
    pub(crate) fn project_unchecked(&self, p: &Vec3) -> [f64; 2] {
        [
            self.principal_point[0] + self.focal_px * p.x / p.z,
            self.principal_point[1] - self.focal_px * p.y / p.z,
        ]
    }
}

impl Default for PinholeCamera {
    fn default() -> Self {
        Self::default_for(DEFAULT_IMAGE_SIZE, DEFAULT_IMAGE_SIZE).expect("valid default camera")
    }
}

/// Projected axis-aligned bounds: `[u_min, v_min, u_max, v_max]`.
pub fn projected_bounds(
    camera: &PinholeCamera,
    points: impl IntoIterator<Item = Vec3>,
) -> [f64; 4] {
    let mut b = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    for p in points {
        let [u, v] = camera.project_unchecked(&p);
        b[0] = b[0].min(u);
        b[1] = b[1].min(v);
        b[2] = b[2].max(u);
        b[3] = b[3].max(v);
    }
    b
}

/// Translation that centers the rotated mesh on the principal point with a
/// projected bounding-box height of `fill_fraction · image_height`.
///
/// The depth starts from a closed-form estimate and the translation is then
/// refined by re-projecting until height and center are exact to ~1e-9.
/// The result cancels any constant offset of the input mesh.
pub fn center_face(
    mesh: &FaceMesh,
    camera: &PinholeCamera,
    rotation: &Matrix3<f64>,
    fill_fraction: f64,
) -> Result<Vec3, CameraError> {
    if !(fill_fraction > 0.0 && fill_fraction < 1.0) {
        return Err(CameraError::InvalidFill(fill_fraction));
    }
    if mesh.positions.is_empty() {
        return Err(CameraError::EmptyMesh);
    }
    let rotated: Vec<Vec3> = mesh
        .positions
        .iter()
        .map(|p| to_camera(rotation, &Vec3::zeros(), p))
        .collect();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for q in &rotated {
        lo = lo.inf(q);
        hi = hi.sup(q);
    }
    let center = (lo + hi) / 2.0;
    let extent = hi - lo;
    if !(extent.y > 0.0) {
        return Err(CameraError::DegenerateExtent);
    }
    let local: Vec<Vec3> = rotated.iter().map(|q| q - center).collect();

    let target = fill_fraction * f64::from(camera.height);
    let f = camera.focal_px;
    let [pu, pv] = camera.principal_point;
    // Reference depth: the frontal extent at a distance where it would fill
    // the target height under a flat-object approximation, kept clear of the
    // near plane by half the depth extent.
    let mut t = Vec3::new(0.0, 0.0, f * extent.y / target + extent.z / 2.0);
    for _ in 0..CENTERING_MAX_ITERATIONS {
        if local.iter().any(|q| q.z + t.z <= NEAR_PLANE_MM) {
            return Err(CameraError::NearPlane(
                local
                    .iter()
                    .map(|q| q.z + t.z)
                    .fold(f64::INFINITY, f64::min),
            ));
        }
        let b = projected_bounds(camera, local.iter().map(|q| q + t));
        let height = b[3] - b[1];
        if !(height > 0.0) || !height.is_finite() {
            return Err(CameraError::DegenerateExtent);
        }
        let du = (b[0] + b[2]) / 2.0 - pu;
        let dv = (b[1] + b[3]) / 2.0 - pv;
        let scale_error = height / target - 1.0;
        if scale_error.abs() < 1e-12 && du.abs() < 1e-9 && dv.abs() < 1e-9 {
            break;
        }
        t.z *= height / target;
        t.x -= du * t.z / f;
        t.y += dv * t.z / f;
    }
    let min_z = local
        .iter()
        .map(|q| q.z + t.z)
        .fold(f64::INFINITY, f64::min);
    if min_z <= NEAR_PLANE_MM {
        return Err(CameraError::NearPlane(min_z));
    }
    // F·R·p + t_out = (F·R·p - center) + t
    Ok(t - center)
}

/// Closed angle interval, stored in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    low: f64,
    high: f64,
    degrees: [f64; 2],
}

impl AngleRange {
    pub fn from_degrees(low: f64, high: f64) -> Result<Self, CameraError> {
        if !(low.is_finite() && high.is_finite() && low <= high && low >= -180.0 && high <= 180.0) {
            return Err(CameraError::InvalidRange { low, high });
        }
        Ok(Self {
            low: low.to_radians(),
            high: high.to_radians(),
            degrees: [low, high],
        })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    /// The bounds exactly as given.
    pub fn degrees(&self) -> [f64; 2] {
        self.degrees
    }

    /// Whether `angle` (radians) lies in the range, allowing `tol` radians.
    pub fn contains(&self, angle: f64, tol: f64) -> bool {
        angle >= self.low - tol && angle <= self.high + tol
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        (self.low + (self.high - self.low) * u).clamp(self.low, self.high)
    }
}

/// Uniform head-pose ranges. Serialized in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRangesDegrees", into = "PoseRangesDegrees")]
pub struct PoseRanges {
    pub yaw: AngleRange,
    pub pitch: AngleRange,
    pub roll: AngleRange,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRangesDegrees {
    yaw_deg: [f64; 2],
    pitch_deg: [f64; 2],
    roll_deg: [f64; 2],
}

impl TryFrom<PoseRangesDegrees> for PoseRanges {
    type Error = CameraError;

    fn try_from(d: PoseRangesDegrees) -> Result<Self, Self::Error> {
        PoseRanges::from_degrees(d.yaw_deg, d.pitch_deg, d.roll_deg)
    }
}

impl From<PoseRanges> for PoseRangesDegrees {
    fn from(r: PoseRanges) -> Self {
        Self {
            yaw_deg: r.yaw.degrees(),
            pitch_deg: r.pitch.degrees(),
            roll_deg: r.roll.degrees(),
        }
    }
}

impl PoseRanges {
    pub fn from_degrees(
        yaw: [f64; 2],
        pitch: [f64; 2],
        roll: [f64; 2],
    ) -> Result<Self, CameraError> {
        Ok(Self {
            yaw: AngleRange::from_degrees(yaw[0], yaw[1])?,
            pitch: AngleRange::from_degrees(pitch[0], pitch[1])?,
            roll: AngleRange::from_degrees(roll[0], roll[1])?,
        })
    }

    /// Independent uniform draws of `(yaw, pitch, roll)` in radians.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let yaw = self.yaw.sample(rng);
        let pitch = self.pitch.sample(rng);
        let roll = self.roll.sample(rng);
        (yaw, pitch, roll)
    }
}
