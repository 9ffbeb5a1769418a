use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use super::annotation::{DatasetManifest, ManifestRecord, SampleAnnotation};
use super::generate::sha256_hex;
use super::DatasetError;
use crate::camera::rotation_from_angles;

/// Slack allowed on angle range checks and rotation reconstruction.
const ANGLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    ImageChecksum,
    AnnotationChecksum,
    AnnotationUnreadable,
    IndexMismatch,
    AngleOutOfRange,
    CoefficientOutOfRange,
    CoefficientCount,
    RotationMismatch,
    IdentityInconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub file: String,
    pub kind: ProblemKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub records: usize,
    pub problems: Vec<Problem>,
    /// Files named in the manifest but absent on disk.
    pub missing: Vec<String>,
    /// Files in identity folders that the manifest does not name.
    pub orphans: Vec<String>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty() && self.missing.is_empty() && self.orphans.is_empty()
    }
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, DatasetError> {
    match std::fs::read(path) {
        Ok(b) => Ok(Some(b)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(DatasetError::Io {
            path: path.to_owned(),
            source: e,
        }),
    }
}

/// Check a generated dataset against its manifest.
///
/// Only an unreadable manifest is an error; everything else is collected
/// into the report.
pub fn verify_dataset(manifest_path: &Path) -> Result<VerificationReport, DatasetError> {
    let bytes = std::fs::read(manifest_path).map_err(DatasetError::io(manifest_path))?;
    let manifest: DatasetManifest =
        serde_json::from_slice(&bytes).map_err(|source| DatasetError::Json {
            path: manifest_path.to_owned(),
            source,
        })?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let config = &manifest.config;
    let bound = config.truncation.get();

    let mut report = VerificationReport {
        records: manifest.records.len(),
        ..Default::default()
    };
    let mut problem = |file: &str, kind, detail: String| {
        report.problems.push(Problem {
            file: file.to_string(),
            kind,
            detail,
        })
    };
    let mut missing = Vec::new();
    let mut identities: BTreeMap<usize, Vec<(String, Vec<u64>)>> = BTreeMap::new();
    let mut expected = BTreeSet::new();

    for ManifestRecord {
        identity_id,
        sample_id,
        image,
        annotation,
        image_sha256,
        annotation_sha256,
    } in &manifest.records
    {
        expected.insert(image.clone());
        expected.insert(annotation.clone());
        match read_optional(&root.join(image))? {
            None => missing.push(image.clone()),
            Some(b) if sha256_hex(&b) != *image_sha256 => problem(
                image,
                ProblemKind::ImageChecksum,
                "SHA-256 differs from manifest".into(),
            ),
            Some(_) => {}
        }
        let Some(b) = read_optional(&root.join(annotation))? else {
            missing.push(annotation.clone());
            continue;
        };
        if sha256_hex(&b) != *annotation_sha256 {
            problem(
                annotation,
                ProblemKind::AnnotationChecksum,
                "SHA-256 differs from manifest".into(),
            );
        }
        let a: SampleAnnotation = match serde_json::from_slice(&b) {
            Ok(a) => a,
            Err(e) => {
                problem(annotation, ProblemKind::AnnotationUnreadable, e.to_string());
                continue;
            }
        };
        if a.identity_id != *identity_id || a.sample_id != *sample_id || a.image != *image {
            problem(
                annotation,
                ProblemKind::IndexMismatch,
                format!(
                    "annotation says identity {} sample {} ({}), manifest says identity {identity_id} sample {sample_id} ({image})",
                    a.identity_id, a.sample_id, a.image
                ),
            );
        }
        for (name, value, range) in [
            ("yaw", a.yaw, config.pose_ranges.yaw),
            ("pitch", a.pitch, config.pose_ranges.pitch),
            ("roll", a.roll, config.pose_ranges.roll),
        ] {
            if !range.contains(value, ANGLE_TOLERANCE) {
                let [lo, hi] = range.degrees();
                problem(
                    annotation,
                    ProblemKind::AngleOutOfRange,
                    format!("{name} {:.6}° outside [{lo}°, {hi}°]", value.to_degrees()),
                );
            }
        }
        for (name, coeffs) in [
            ("shape", &a.shape_coeffs),
            ("color", &a.color_coeffs),
            ("expression", &a.expression_coeffs),
        ] {
            if let Some((k, v)) = coeffs.iter().enumerate().find(|(_, v)| !(v.abs() <= bound)) {
                problem(
                    annotation,
                    ProblemKind::CoefficientOutOfRange,
                    format!("{name} coefficient {k} = {v} exceeds ±{bound}"),
                );
            }
        }
        let r = rotation_from_angles(a.yaw, a.pitch, a.roll);
        let worst = (0..9)
            .map(|k| (r[(k / 3, k % 3)] - a.rotation[k / 3][k % 3]).abs())
            .fold(0.0, f64::max);
        if !(worst <= ANGLE_TOLERANCE) {
            problem(
                annotation,
                ProblemKind::RotationMismatch,
                format!("rotation differs from the angles by {worst:e}"),
            );
        }
        let key = a
            .shape_coeffs
            .iter()
            .chain(&a.color_coeffs)
            .map(|v| v.to_bits())
            .collect();
        identities
            .entry(a.identity_id)
            .or_default()
            .push((annotation.clone(), key));
    }

    // Every image of an identity must carry the identity's (majority)
    // shape and color coefficients.
    for (identity, samples) in &identities {
        let mut counts: BTreeMap<&Vec<u64>, usize> = BTreeMap::new();
        for (_, key) in samples {
            *counts.entry(key).or_default() += 1;
        }
        if counts.len() <= 1 {
            continue;
        }
        let mode = counts
            .iter()
            .max_by_key(|(_, &c)| c)
            .map(|(k, _)| *k)
            .expect("non-empty");
        for (file, key) in samples {
            if key != mode {
                problem(
                    file,
                    ProblemKind::IdentityInconsistent,
                    format!("identity {identity} coefficients differ from its other images"),
                );
            }
        }
    }

    report.missing = missing;
    report.orphans = find_orphans(root, &expected)?;
    Ok(report)
}

fn find_orphans(root: &Path, expected: &BTreeSet<String>) -> Result<Vec<String>, DatasetError> {
    let mut orphans = Vec::new();
    let entries = std::fs::read_dir(root).map_err(DatasetError::io(root))?;
    let mut dirs: Vec<_> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir() && e.file_name().to_string_lossy().starts_with("id_"))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    for dir in dirs {
        let path = root.join(&dir);
        let mut files: Vec<String> = std::fs::read_dir(&path)
            .map_err(DatasetError::io(&path))?
            .filter_map(|e| e.ok())
            .map(|e| format!("{dir}/{}", e.file_name().to_string_lossy()))
            .collect();
        files.sort();
        orphans.extend(files.into_iter().filter(|f| !expected.contains(f)));
    }
    Ok(orphans)
}
