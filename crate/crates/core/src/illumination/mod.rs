//! Spherical-harmonics environment lighting, Lambertian shading and the
//! empirical illumination prior.
//!
//! Conventions: real SH normalized so that `∫ Y_lm² dω = 1`, no
//! Condon-Shortley phase (`Y11 ∝ +x`, `Y1-1 ∝ +y`). Priors exported by other
//! tools may use a different sign convention per band and need converting
//! before use.

mod prior;
mod sh;

use std::path::PathBuf;

pub use prior::{
    format_prior, load_prior, parse_prior, save_prior, IlluminationPrior, BUILTIN_JITTER,
};
pub use sh::{sh_basis, SphericalHarmonicsLighting, BAND_FACTORS, UNIT_TOLERANCE, Y00};

#[derive(Debug, thiserror::Error)]
pub enum IlluminationError {
    #[error("direction is not unit length (|d| = {0})")]
    NonUnitDirection(f64),
    #[error("lighting needs 27 coefficients, got {0}")]
    CoefficientCount(usize),
    #[error("lighting coefficients must be finite")]
    NonFinite,
    #[error("illumination prior is empty")]
    EmptyPrior,
    #[error("jitter scale {0} must be finite and non-negative")]
    InvalidJitter(f64),
    #[error("prior line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
