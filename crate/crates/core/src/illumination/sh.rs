use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::IlluminationError;
use crate::model::Vec3;

/// Allowed deviation of a direction or normal from unit length.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// `1 / (2 sqrt(pi))`
pub const Y00: f64 = 0.282_094_791_773_878_14;
/// `sqrt(3 / (4 pi))`
pub const Y1: f64 = 0.488_602_511_902_919_9;
/// `sqrt(15 / (4 pi))`
pub const Y2_CROSS: f64 = 1.092_548_430_592_079_2;
/// `sqrt(5 / (16 pi))`
pub const Y20: f64 = 0.315_391_565_252_520_05;
/// `sqrt(15 / (16 pi))`
pub const Y22: f64 = 0.546_274_215_296_039_6;

/// Clamped-cosine convolution factors for bands 0, 1, 2.
pub const BAND_FACTORS: [f64; 3] = [PI, 2.0 * PI / 3.0, PI / 4.0];

const BAND_OF: [usize; 9] = [0, 1, 1, 1, 2, 2, 2, 2, 2];

fn check_unit(v: &Vec3) -> Result<(), IlluminationError> {
    let len = v.norm();
    if (len - 1.0).abs() <= UNIT_TOLERANCE {
        Ok(())
    } else {
        Err(IlluminationError::NonUnitDirection(len))
    }
}

/// Real, unit-normalized SH basis up to band 2 in the order
/// `[Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22]`.
pub fn sh_basis(direction: &Vec3) -> Result<[f64; 9], IlluminationError> {
    check_unit(direction)?;
    Ok(sh_basis_unchecked(direction))
}

#[inline]
pub(crate) fn sh_basis_unchecked(d: &Vec3) -> [f64; 9] {
    let (x, y, z) = (d.x, d.y, d.z);
    [
        Y00,
        Y1 * y,
        Y1 * z,
        Y1 * x,
        Y2_CROSS * x * y,
        Y2_CROSS * y * z,
        Y20 * (3.0 * z * z - 1.0),
        Y2_CROSS * x * z,
        Y22 * (x * x - y * y),
    ]
}

/// Environment radiance as 9 SH coefficients per color channel.
///
/// Directions live in the renderer's world frame: right-handed, `+y` up and
/// `+z` pointing from the face towards the camera.
///
/// Serialized as a flat channel-major list of 27 numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct SphericalHarmonicsLighting {
    pub coeffs: [[f64; 9]; 3],
}

impl SphericalHarmonicsLighting {
    pub const ZERO: Self = Self {
        coeffs: [[0.0; 9]; 3],
    };

    /// Constant radiance `level` in every direction, on every channel.
    pub fn ambient(level: f64) -> Self {
        let mut l = Self::ZERO;
        for ch in &mut l.coeffs {
            ch[0] = level / Y00;
        }
        l
    }

    /// From 27 channel-major values (`[R:9][G:9][B:9]`).
    pub fn from_flat(values: &[f64]) -> Result<Self, IlluminationError> {
        if values.len() != 27 {
            return Err(IlluminationError::CoefficientCount(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IlluminationError::NonFinite);
        }
        let mut l = Self::ZERO;
        for (i, v) in values.iter().enumerate() {
            l.coeffs[i / 9][i % 9] = *v;
        }
        Ok(l)
    }

    pub fn to_flat(&self) -> [f64; 27] {
        let mut out = [0.0; 27];
        for (i, v) in out.iter_mut().enumerate() {
            *v = self.coeffs[i / 9][i % 9];
        }
        out
    }

    /// Lambertian irradiance at a surface with unit `normal`, unclamped.
    pub fn irradiance(&self, normal: &Vec3) -> Result<[f64; 3], IlluminationError> {
        check_unit(normal)?;
        Ok(self.irradiance_unchecked(normal))
    }

    #[inline]
    pub(crate) fn irradiance_unchecked(&self, normal: &Vec3) -> [f64; 3] {
        let y = sh_basis_unchecked(normal);
        self.coeffs.map(|ch| {
            ch.iter()
                .zip(&y)
                .zip(BAND_OF)
                .map(|((l, y), band)| BAND_FACTORS[band] * l * y)
                .sum()
        })
    }

    /// Diffuse radiosity `albedo · max(E, 0) / π`.
    ///
    /// Under constant unit radiance `E = π`, so the result equals the albedo.
    pub fn shade(&self, albedo: [f64; 3], normal: &Vec3) -> Result<[f64; 3], IlluminationError> {
        check_unit(normal)?;
        Ok(self.shade_unchecked(albedo, normal))
    }

    #[inline]
    pub(crate) fn shade_unchecked(&self, albedo: [f64; 3], normal: &Vec3) -> [f64; 3] {
        let e = self.irradiance_unchecked(normal);
        [0, 1, 2].map(|c| albedo[c] * e[c].max(0.0) / PI)
    }
}

impl From<SphericalHarmonicsLighting> for Vec<f64> {
    fn from(l: SphericalHarmonicsLighting) -> Self {
        l.to_flat().to_vec()
    }
}

impl TryFrom<Vec<f64>> for SphericalHarmonicsLighting {
    type Error = IlluminationError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::from_flat(&v)
    }
}
