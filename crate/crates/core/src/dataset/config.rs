use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::camera::{PinholeCamera, PoseRanges, DEFAULT_FILL_FRACTION, DEFAULT_IMAGE_SIZE};
use crate::model::Truncation;

/// `toy:<seed>` for the procedural model, otherwise a `.pcmf` path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelSource {
    Toy(u64),
    File(PathBuf),
}

/// `builtin` for the shipped prior, otherwise a prior text file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PriorSource {
    Builtin,
    File(PathBuf),
}

/// `procedural` for generated noise textures, otherwise an image directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackgroundSpec {
    Procedural,
    Directory(PathBuf),
}

macro_rules! string_enum {
    ($ty:ident, $keyword:literal => $unit:expr, $path_variant:ident) => {
        impl FromStr for $ty {
            type Err = DatasetError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                if s.is_empty() {
                    return Err(DatasetError::Config(format!(
                        "empty {} source",
                        stringify!($ty)
                    )));
                }
                Ok(if s == $keyword {
                    $unit
                } else {
                    Self::$path_variant(PathBuf::from(s))
                })
            }
        }
        impl TryFrom<String> for $ty {
            type Error = DatasetError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                s.parse()
            }
        }
        impl From<$ty> for String {
            fn from(v: $ty) -> String {
                v.to_string()
            }
        }
    };
}

string_enum!(PriorSource, "builtin" => PriorSource::Builtin, File);
string_enum!(BackgroundSpec, "procedural" => BackgroundSpec::Procedural, Directory);

impl FromStr for ModelSource {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(seed) = s.strip_prefix("toy:") {
            return seed
                .parse()
                .map(ModelSource::Toy)
                .map_err(|_| DatasetError::Config(format!("bad toy model seed in {s:?}")));
        }
        if s.is_empty() {
            return Err(DatasetError::Config("empty model source".into()));
        }
        Ok(ModelSource::File(PathBuf::from(s)))
    }
}

impl TryFrom<String> for ModelSource {
    type Error = DatasetError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ModelSource> for String {
    fn from(v: ModelSource) -> String {
        v.to_string()
    }
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::Toy(seed) => write!(f, "toy:{seed}"),
            ModelSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl fmt::Display for PriorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSource::Builtin => f.write_str("builtin"),
            PriorSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl fmt::Display for BackgroundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackgroundSpec::Procedural => f.write_str("procedural"),
            BackgroundSpec::Directory(p) => write!(f, "{}", p.display()),
        }
    }
}

fn default_image_size() -> u32 {
    DEFAULT_IMAGE_SIZE
}

fn default_fill() -> f64 {
    DEFAULT_FILL_FRACTION
}

fn default_model() -> ModelSource {
    ModelSource::Toy(0)
}

/// Everything that determines a dataset's content.
///
/// Angles are given in degrees. `output_dir` is accepted in config files but
/// never serialized, so manifests do not depend on where a dataset lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub identity_count: usize,
    pub samples_per_identity: usize,
    pub pose_ranges: PoseRanges,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_image_size")]
    pub image_width: u32,
    #[serde(default = "default_image_size")]
    pub image_height: u32,
    /// Focal length in pixels; defaults to 2.6 × image height.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_px: Option<f64>,
    #[serde(default = "default_fill")]
    pub fill_fraction: f64,
    #[serde(default = "default_model")]
    pub model: ModelSource,
    #[serde(default = "builtin_prior")]
    pub prior: PriorSource,
    /// Overrides the prior's own jitter scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub illumination_jitter: Option<f64>,
    #[serde(default = "procedural_backgrounds")]
    pub backgrounds: BackgroundSpec,
    pub master_seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}

fn builtin_prior() -> PriorSource {
    PriorSource::Builtin
}

fn procedural_backgrounds() -> BackgroundSpec {
    BackgroundSpec::Procedural
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.identity_count == 0 {
            return Err(DatasetError::Config(
                "identity_count must be at least 1".into(),
            ));
        }
        if self.samples_per_identity == 0 {
            return Err(DatasetError::Config(
                "samples_per_identity must be at least 1".into(),
            ));
        }
        if self.identity_count > u32::MAX as usize || self.samples_per_identity > u32::MAX as usize
        {
            return Err(DatasetError::Config(
                "identity or sample count too large".into(),
            ));
        }
        if !(self.fill_fraction > 0.0 && self.fill_fraction < 1.0) {
            return Err(DatasetError::Config(format!(
                "fill_fraction {} must lie in (0, 1)",
                self.fill_fraction
            )));
        }
        if let Some(j) = self.illumination_jitter {
            if !(j.is_finite() && j >= 0.0) {
                return Err(DatasetError::Config(format!(
                    "illumination_jitter {j} must be non-negative"
                )));
            }
        }
        self.camera()?;
        Ok(())
    }

    pub fn camera(&self) -> Result<PinholeCamera, DatasetError> {
        let cam = match self.focal_px {
            Some(f) => PinholeCamera::new(
                f,
                [
                    f64::from(self.image_width) / 2.0,
                    f64::from(self.image_height) / 2.0,
                ],
                self.image_width,
                self.image_height,
            ),
            None => PinholeCamera::default_for(self.image_width, self.image_height),
        };
        cam.map_err(|e| DatasetError::Config(e.to_string()))
    }

    pub fn total_images(&self) -> usize {
        self.identity_count * self.samples_per_identity
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DatasetError> {
        let config: Self =
            toml::from_str(text).map_err(|e| DatasetError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            DatasetError::Config(msg) => DatasetError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

/// Dataset recipes: full-size counts and pose ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 10 000 identities × 100 images, yaw ±90°, pitch ±30°, roll ±15°.
    Syn1M,
    /// As `Syn1M` with yaw limited to ±35°.
    SynFront,
    /// As `Syn1M` with 20 000 identities.
    Syn2M,
}

impl FromStr for Preset {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "syn-1m" => Ok(Preset::Syn1M),
            "syn-front" => Ok(Preset::SynFront),
            "syn-2m" => Ok(Preset::Syn2M),
            other => Err(DatasetError::Config(format!(
                "unknown preset {other:?} (expected syn-1m, syn-front or syn-2m)"
            ))),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Syn1M => "syn-1m",
            Preset::SynFront => "syn-front",
            Preset::Syn2M => "syn-2m",
        }
    }

    pub fn full_identity_count(self) -> usize {
        match self {
            Preset::Syn1M | Preset::SynFront => 10_000,
            Preset::Syn2M => 20_000,
        }
    }

    pub const SAMPLES_PER_IDENTITY: usize = 100;

    pub fn yaw_range_deg(self) -> [f64; 2] {
        match self {
            Preset::SynFront => [-35.0, 35.0],
            Preset::Syn1M | Preset::Syn2M => [-90.0, 90.0],
        }
    }

    /// The recipe with the identity count divided by `scale` (rounded up),
    /// keeping 100 images per identity.
    pub fn config(self, scale: usize, master_seed: u64) -> Result<GenerationConfig, DatasetError> {
        if scale == 0 {
            return Err(DatasetError::Config("scale must be at least 1".into()));
        }
        let pose_ranges =
            PoseRanges::from_degrees(self.yaw_range_deg(), [-30.0, 30.0], [-15.0, 15.0])
                .expect("preset ranges are valid");
        Ok(GenerationConfig {
            identity_count: self.full_identity_count().div_ceil(scale),
            samples_per_identity: Self::SAMPLES_PER_IDENTITY,
            pose_ranges,
            truncation: Truncation::DEFAULT,
            image_width: DEFAULT_IMAGE_SIZE,
            image_height: DEFAULT_IMAGE_SIZE,
            focal_px: None,
            fill_fraction: DEFAULT_FILL_FRACTION,
            model: ModelSource::Toy(0),
            prior: PriorSource::Builtin,
            illumination_jitter: None,
            backgrounds: BackgroundSpec::Procedural,
            master_seed,
            output_dir: None,
        })
    }
}
