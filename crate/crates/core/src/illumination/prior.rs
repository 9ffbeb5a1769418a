use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::sh::SphericalHarmonicsLighting;
use super::IlluminationError;

const DEFAULT_PRIOR: &str = include_str!("../../assets/default_prior.txt");

/// Default jitter applied to the built-in prior, in units of the prior's
/// per-coefficient standard deviation.
pub const BUILTIN_JITTER: f64 = 0.25;

/// Empirical distribution of SH lighting conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationPrior {
    samples: Vec<SphericalHarmonicsLighting>,
    jitter_scale: f64,
    stddevs: [f64; 27],
}

impl IlluminationPrior {
    pub fn new(
        samples: Vec<SphericalHarmonicsLighting>,
        jitter_scale: f64,
    ) -> Result<Self, IlluminationError> {
        if samples.is_empty() {
            return Err(IlluminationError::EmptyPrior);
        }
        if !(jitter_scale.is_finite() && jitter_scale >= 0.0) {
            return Err(IlluminationError::InvalidJitter(jitter_scale));
        }
        if samples
            .iter()
            .any(|s| s.to_flat().iter().any(|v| !v.is_finite()))
        {
            return Err(IlluminationError::NonFinite);
        }
        let count = samples.len() as f64;
        let mut mean = [0.0; 27];
        for s in &samples {
            for (m, v) in mean.iter_mut().zip(s.to_flat()) {
                *m += v / count;
            }
        }
        let mut stddevs = [0.0; 27];
        for s in &samples {
            for ((sd, v), m) in stddevs.iter_mut().zip(s.to_flat()).zip(mean) {
                *sd += (v - m) * (v - m) / count;
            }
        }
        for sd in &mut stddevs {
            *sd = sd.sqrt();
        }
        Ok(Self {
            samples,
            jitter_scale,
            stddevs,
        })
    }

    /// The shipped 12-condition prior.
    pub fn builtin() -> Self {
        let samples = parse_prior(DEFAULT_PRIOR).expect("built-in prior is well formed");
        Self::new(samples, BUILTIN_JITTER).expect("built-in prior is valid")
    }

    pub fn samples(&self) -> &[SphericalHarmonicsLighting] {
        &self.samples
    }

    pub fn jitter_scale(&self) -> f64 {
        self.jitter_scale
    }

    pub fn with_jitter(mut self, jitter_scale: f64) -> Result<Self, IlluminationError> {
        if !(jitter_scale.is_finite() && jitter_scale >= 0.0) {
            return Err(IlluminationError::InvalidJitter(jitter_scale));
        }
        self.jitter_scale = jitter_scale;
        Ok(self)
    }

    /// Population standard deviation of each of the 27 coefficients.
    pub fn coefficient_stddevs(&self) -> &[f64; 27] {
        &self.stddevs
    }

    /// Pick a stored condition uniformly, then add Gaussian jitter of
    /// `jitter_scale · stddev` per coefficient.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SphericalHarmonicsLighting {
        let pick = rng.random_range(0..self.samples.len());
        let mut flat = self.samples[pick].to_flat();
        if self.jitter_scale > 0.0 {
            for (v, sd) in flat.iter_mut().zip(&self.stddevs) {
                let z: f64 = rng.sample(StandardNormal);
                *v += self.jitter_scale * sd * z;
            }
        }
        SphericalHarmonicsLighting::from_flat(&flat).expect("27 finite values")
    }
}

/// Parse the prior text format: one sample per line, 27 whitespace-separated
/// decimals in channel-major order; blank lines and `#` comments ignored.
pub fn parse_prior(text: &str) -> Result<Vec<SphericalHarmonicsLighting>, IlluminationError> {
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| IlluminationError::Parse {
                    line: i + 1,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != 27 {
            return Err(IlluminationError::Parse {
                line: i + 1,
                message: format!("expected 27 values, found {}", values.len()),
            });
        }
        samples.push(SphericalHarmonicsLighting::from_flat(&values).map_err(|e| {
            IlluminationError::Parse {
                line: i + 1,
                message: e.to_string(),
            }
        })?);
    }
    if samples.is_empty() {
        return Err(IlluminationError::EmptyPrior);
    }
    Ok(samples)
}

pub fn format_prior(samples: &[SphericalHarmonicsLighting]) -> String {
    let mut out = String::from("# 27 SH coefficients per line, channel-major [R:9][G:9][B:9]\n");
    for s in samples {
        let row: Vec<String> = s.to_flat().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Load a prior file. Loaded priors carry no jitter unless set explicitly.
pub fn load_prior(path: &Path) -> Result<IlluminationPrior, IlluminationError> {
    let text = fs::read_to_string(path).map_err(|source| IlluminationError::Io {
        path: path.to_owned(),
        source,
    })?;
    IlluminationPrior::new(parse_prior(&text)?, 0.0)
}

pub fn save_prior(prior: &IlluminationPrior, path: &Path) -> Result<(), IlluminationError> {
    crate::fsutil::write_atomic(path, format_prior(prior.samples()).as_bytes()).map_err(|source| {
        IlluminationError::Io {
            path: path.to_owned(),
            source,
        }
    })
}
