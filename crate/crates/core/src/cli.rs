//! Command-line front end. Exit codes: 0 success, 1 usage, 2 invalid input
//! data, 3 output I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use image::ImageEncoder as _;

use crate::camera::{PoseRanges, DEFAULT_FILL_FRACTION};
use crate::dataset::{
    generate_dataset, render_sample, verify_dataset, BackgroundSpec, DatasetError, GenerateOptions,
    GenerationAssets, GenerationConfig, ModelSource, Preset, PriorSource,
};
use crate::eval::{
    compute_roc, cross_validated_accuracy, load_templates, pair_scores, split_by_label, tar_at_far,
    EmbeddingSet, EvalError, PairList, Template, DEFAULT_BETA, DEFAULT_FOLDS,
};
use crate::model::{
    build_toy_model, save_model, ModelError, ToyModelSpec, Truncation, MIN_VERTEX_BUDGET,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "facesynth",
    version,
    about = "Synthetic face images and verification metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the procedural toy face model and save it as a .pcmf file.
    BuildToyModel(BuildToyModelArgs),
    /// Render a single face image and its annotation.
    Render(RenderArgs),
    /// Generate a dataset from a config file or a preset.
    Generate(GenerateArgs),
    /// Dataset verification and face-verification metrics.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
}

#[derive(Debug, Args)]
struct BuildToyModelArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(MIN_VERTEX_BUDGET as u64..))]
    vertices: u64,
    /// Shape and color components; expression gets half as many (at least one).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    components: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// `toy:<seed>` or a .pcmf file.
    #[arg(long, default_value = "toy:0")]
    model: String,
    /// Seed for identity, expression, lighting and background draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    yaw: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pitch: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    roll: f64,
    /// Draw the pose uniformly from yaw ±90°, pitch ±30°, roll ±15° instead.
    #[arg(long, conflicts_with_all = ["yaw", "pitch", "roll"])]
    random_pose: bool,
    /// `builtin` or an illumination prior file.
    #[arg(long, default_value = "builtin")]
    prior: String,
    /// `procedural` or a directory of PNG/JPEG textures.
    #[arg(long, default_value = "procedural")]
    backgrounds: String,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(1..))]
    size: u32,
    #[arg(long, default_value_t = Truncation::DEFAULT.get())]
    truncation: f64,
    /// Output PNG; the annotation is written next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["config", "preset"]))]
struct GenerateArgs {
    /// TOML generation config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// syn-1m, syn-front or syn-2m.
    #[arg(long)]
    preset: Option<String>,
    /// Divide the preset's identity count (samples per identity are kept) [default: 1].
    #[arg(long, conflicts_with = "config", value_parser = clap::value_parser!(u64).range(1..))]
    scale: Option<u64>,
    /// Master seed for presets [default: 0].
    #[arg(long, conflicts_with = "config")]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` from a config file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, env = "FACESYNTH_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Keep intact images from an interrupted run.
    #[arg(long)]
    resume: bool,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Check a generated dataset against its manifest.
    VerifyDataset {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROC curve and TAR at a target FAR.
    Roc {
        #[command(flatten)]
        scores: ScoreArgs,
        #[arg(long, default_value_t = 0.1)]
        far: f64,
        /// Write the ROC points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the JSON metrics here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated verification accuracy.
    Accuracy {
        #[command(flatten)]
        scores: ScoreArgs,
        /// Folds used when the pairs file does not assign them.
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    pairs: PathBuf,
    /// Pair ids name template subjects from this file.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Softmax inverse temperature for template scores.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            message: e.to_string(),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn dataset_failure(e: DatasetError) -> Failure {
    match e {
        DatasetError::Io { .. } | DatasetError::Json { .. } | DatasetError::ThreadPool(_) => {
            Failure::io(e)
        }
        _ => Failure::data(e),
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::BuildToyModel(a) => build_toy(a),
        Command::Render(a) => render(a),
        Command::Generate(a) => generate(a),
        Command::Eval { command } => eval(command),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            log::error!("{}", f.message);
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn log_config(what: &str, value: &impl serde::Serialize) {
    let json = serde_json::to_string(value).unwrap_or_else(|e| format!("<unserializable: {e}>"));
    log::info!("{what}: {json}");
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    crate::fsutil::write_atomic(path, bytes)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::data)?;
    text.push('\n');
    match out {
        Some(path) => write_output(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_toy(a: BuildToyModelArgs) -> Result<(), Failure> {
    let components = a.components as usize;
    let spec = ToyModelSpec {
        seed: a.seed,
        vertex_budget: a.vertices as usize,
        shape_components: components,
        color_components: components,
        expression_components: (components / 2).max(1),
    };
    log_config(
        "effective config",
        &serde_json::json!({
            "seed": spec.seed,
            "vertex_budget": spec.vertex_budget,
            "shape_components": spec.shape_components,
            "color_components": spec.color_components,
            "expression_components": spec.expression_components,
            "out": a.out,
        }),
    );
    let model = build_toy_model(&spec).map_err(|e| match e {
        ModelError::VertexBudget(_) => Failure::usage(e),
        _ => Failure::data(e),
    })?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    save_model(&model, &a.out).map_err(Failure::io)?;
    log::info!(
        "wrote {} ({} vertices, {} triangles)",
        a.out.display(),
        model.vertex_count(),
        model.topology().len()
    );
    Ok(())
}

fn render(a: RenderArgs) -> Result<(), Failure> {
    let pose_ranges = if a.random_pose {
        Preset::Syn1M
            .config(1, 0)
            .map_err(Failure::usage)?
            .pose_ranges
    } else {
        PoseRanges::from_degrees([a.yaw, a.yaw], [a.pitch, a.pitch], [a.roll, a.roll])
            .map_err(Failure::usage)?
    };
    let config = GenerationConfig {
        identity_count: 1,
        samples_per_identity: 1,
        pose_ranges,
        truncation: Truncation::new(a.truncation).map_err(Failure::usage)?,
        image_width: a.size,
        image_height: a.size,
        focal_px: None,
        fill_fraction: DEFAULT_FILL_FRACTION,
        model: a.model.parse::<ModelSource>().map_err(Failure::usage)?,
        prior: a.prior.parse::<PriorSource>().map_err(Failure::usage)?,
        illumination_jitter: None,
        backgrounds: a
            .backgrounds
            .parse::<BackgroundSpec>()
            .map_err(Failure::usage)?,
        master_seed: a.seed,
        output_dir: None,
    };
    log_config("effective config", &config);
    config.validate().map_err(Failure::usage)?;
    let assets = GenerationAssets::load(&config).map_err(Failure::data)?;
    let identity = crate::dataset::identity_params(&config, &assets.model, 0);
    let (image, mut annotation) =
        render_sample(&config, &assets, &identity, 0, 0).map_err(Failure::data)?;
    annotation.image = a
        .out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();

    let mut png = Vec::new();
    image::codecs::png::PngEncoder::new(&mut png)
        .write_image(
            image.as_raw(),
            image.width(),
            image.height(),
            image::ExtendedColorType::Rgb8,
        )
        .map_err(Failure::data)?;
    write_output(&a.out, &png)?;
    let mut json = serde_json::to_vec_pretty(&annotation).map_err(Failure::data)?;
    json.push(b'\n');
    write_output(&a.out.with_extension("json"), &json)?;
    log::info!("wrote {}", a.out.display());
    Ok(())
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let mut config = match (&a.config, &a.preset) {
        (Some(path), _) => GenerationConfig::load(path).map_err(|e| match e {
            DatasetError::Io { .. } => Failure::data(e),
            other => dataset_failure(other),
        })?,
        (None, Some(name)) => {
            let preset: Preset = name.parse().map_err(Failure::usage)?;
            preset
                .config(a.scale.unwrap_or(1) as usize, a.seed.unwrap_or(0))
                .map_err(Failure::usage)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(out) = &a.out {
        config.output_dir = Some(out.clone());
    }
    let Some(out_dir) = config.output_dir.clone() else {
        return Err(Failure::usage(
            "no output directory: pass --out or set output_dir",
        ));
    };
    let options = GenerateOptions {
        threads: a.threads.map_or_else(default_threads, |t| t as usize),
        resume: a.resume,
    };
    log_config("effective config", &config);
    log::info!(
        "output {} | {} threads | resume {}",
        out_dir.display(),
        options.threads,
        options.resume
    );
    let report = generate_dataset(&config, &out_dir, &options).map_err(dataset_failure)?;
    log::info!(
        "{} images ({} rendered, {} reused); manifest {}",
        report.manifest.totals.images,
        report.rendered,
        report.reused,
        report.manifest_path.display()
    );
    Ok(())
}

type Inputs = (EmbeddingSet, PairList, Option<BTreeMap<String, Template>>);

fn load_inputs(s: &ScoreArgs) -> Result<Inputs, Failure> {
    if !(s.beta.is_finite() && s.beta >= 0.0) {
        return Err(Failure::usage(format!(
            "--beta {} must be finite and >= 0",
            s.beta
        )));
    }
    let named = |path: &Path, e: EvalError| Failure::data(format!("{}: {e}", path.display()));
    let embeddings = EmbeddingSet::load(&s.embeddings).map_err(|e| named(&s.embeddings, e))?;
    let pairs = PairList::load(&s.pairs).map_err(|e| named(&s.pairs, e))?;
    let templates = s
        .templates
        .as_deref()
        .map(|p| load_templates(p).map_err(|e| named(p, e)))
        .transpose()?;
    Ok((embeddings, pairs, templates))
}

fn score_config(s: &ScoreArgs) -> serde_json::Value {
    serde_json::json!({
        "embeddings": s.embeddings,
        "pairs": s.pairs,
        "templates": s.templates,
        "beta": s.beta,
    })
}

fn eval(command: EvalCommand) -> Result<(), Failure> {
    match command {
        EvalCommand::VerifyDataset { manifest, out } => {
            log_config(
                "effective config",
                &serde_json::json!({ "manifest": manifest }),
            );
            let report = verify_dataset(&manifest).map_err(|e| match e {
                DatasetError::Io { .. } | DatasetError::Json { .. } => Failure::data(e),
                other => dataset_failure(other),
            })?;
            emit_json(&report, out.as_deref())?;
            if report.is_ok() {
                log::info!("{} records verified", report.records);
                Ok(())
            } else {
                Err(Failure::data(format!(
                    "dataset verification failed: {} problems, {} missing, {} orphans",
                    report.problems.len(),
                    report.missing.len(),
                    report.orphans.len()
                )))
            }
        }
        EvalCommand::Roc {
            scores,
            far,
            csv,
            out,
        } => {
            if !(0.0..=1.0).contains(&far) {
                return Err(Failure::usage(format!("--far {far} must lie in [0, 1]")));
            }
            let mut effective = score_config(&scores);
            effective["far"] = far.into();
            log_config("effective config", &effective);
            let (embeddings, pairs, templates) = load_inputs(&scores)?;
            let values = pair_scores(&pairs, &embeddings, templates.as_ref(), scores.beta)
                .map_err(Failure::data)?;
            let (pos, neg) = split_by_label(&values, &pairs);
            let curve = compute_roc(&pos, &neg).map_err(Failure::data)?;
            if let Some(path) = &csv {
                write_output(path, curve.to_csv().as_bytes())?;
            }
            emit_json(
                &serde_json::json!({
                    "pairs": pairs.len(),
                    "positives": pos.len(),
                    "negatives": neg.len(),
                    "far_target": far,
                    "tar_at_far": tar_at_far(&curve, far),
                    "auc": curve.auc(),
                    "roc_points": curve.points().len(),
                }),
                out.as_deref(),
            )
        }
        EvalCommand::Accuracy { scores, folds, out } => {
            let mut effective = score_config(&scores);
            effective["folds"] = folds.into();
            log_config("effective config", &effective);
            if folds < 2 {
                return Err(Failure::usage(format!(
                    "--folds {folds} must be at least 2"
                )));
            }
            let (embeddings, pairs, templates) = load_inputs(&scores)?;
            let cv = cross_validated_accuracy(
                &pairs,
                &embeddings,
                templates.as_ref(),
                scores.beta,
                folds,
            )
            .map_err(Failure::data)?;
            emit_json(
                &serde_json::json!({
                    "pairs": pairs.len(),
                    "folds": cv.folds.len(),
                    "accuracy": cv.mean_accuracy,
                    "fold_accuracies": cv.fold_accuracies(),
                    "fold_thresholds": cv.folds.iter().map(|f| f.threshold).collect::<Vec<_>>(),
                }),
                out.as_deref(),
            )
        }
    }
}
