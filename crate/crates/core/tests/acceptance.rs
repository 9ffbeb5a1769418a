#![allow(clippy::needless_range_loop)]

//! One PASS/FAIL line per acceptance criterion.
//!
//! Lines go straight to the process stdout so they show up without
//! `--nocapture`. Every criterion is asserted except the multi-core speedup,
//! which is only enforced on machines with at least 8 hardware threads.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    cv_oracle, monte_carlo_irradiance, oracle_coverage, random_folds, random_instance,
    random_lighting, random_triangle, random_unit, roc_oracle, tar_at_far_oracle,
};
use facesynth::camera::PoseRanges;
use facesynth::dataset::{
    generate_dataset, identity_params, DatasetManifest, GenerateOptions, GenerationConfig, Preset,
    SampleAnnotation,
};
use facesynth::eval::{
    compute_roc, cosine_similarity, cross_validated_accuracy, cross_validated_accuracy_from_scores,
    tar_at_far, EmbeddingSet, Pair, PairList,
};
use facesynth::illumination::{SphericalHarmonicsLighting, Y00};
use facesynth::model::{build_toy_model, ToyModelSpec};
use facesynth::render::{for_each_covered_pixel, snap};
use facesynth::stream::derive_stream;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    enforced: bool,
}

fn report(o: &Outcome) {
    let mut out = std::io::stdout().lock();
    let status = if o.pass { "PASS" } else { "FAIL" };
    writeln!(out, "{status} {}: {}", o.name, o.detail).unwrap();
    out.flush().unwrap();
}

fn reproducibility_statement() -> Outcome {
    // dataset recipes, not recognition numbers, are what can be reproduced
    let expected = [
        (Preset::Syn1M, 10_000, [-90.0, 90.0]),
        (Preset::SynFront, 10_000, [-35.0, 35.0]),
        (Preset::Syn2M, 20_000, [-90.0, 90.0]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (preset, identities, yaw) in expected {
        let c = preset.config(1, 0).unwrap();
        let r = c.pose_ranges;
        ok &= c.identity_count == identities
            && c.samples_per_identity == 100
            && r.yaw.degrees() == yaw
            && r.pitch.degrees() == [-30.0, 30.0]
            && r.roll.degrees() == [-15.0, 15.0];
        parts.push(format!(
            "{} {}x{} yaw {:?}",
            preset.name(),
            c.identity_count,
            c.samples_per_identity,
            r.yaw.degrees()
        ));
    }
    Outcome {
        name: "reproducibility statement",
        pass: ok,
        detail: format!(
            "recognition numbers need deep-network training on >=1e6 images and are not reproduced; preset recipes: {}",
            parts.join(", ")
        ),
        enforced: true,
    }
}

fn sh_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = derive_stream(100, "acceptance-sh", &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let l = random_lighting(&mut rng);
        let n = random_unit(&mut rng);
        let exact = l.irradiance(&n).unwrap();
        let mc = monte_carlo_irradiance(&l, &n, 1_000_000, &mut rng);
        for c in 0..3 {
            worst = worst.max((exact[c] - mc[c]).abs() / mc[c].abs());
        }
    }
    let mut ambient = SphericalHarmonicsLighting::ZERO;
    for (c, ch) in ambient.coeffs.iter_mut().enumerate() {
        ch[0] = 0.5 + c as f64;
    }
    let mut ambient_err: f64 = 0.0;
    for _ in 0..100 {
        let e = ambient.irradiance(&random_unit(&mut rng)).unwrap();
        for c in 0..3 {
            ambient_err =
                ambient_err.max((e[c] - std::f64::consts::PI * Y00 * ambient.coeffs[c][0]).abs());
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        name: "SH correctness",
        pass: worst < 0.01 && ambient_err < 1e-4 && elapsed < Duration::from_secs(60),
        detail: format!("max MC rel err {worst:.2e} (<1e-2), ambient err {ambient_err:.1e} (<1e-4), {:.1}s (<60s)", elapsed.as_secs_f64()),
        enforced: true,
    }
}

fn shading_anchor() -> Outcome {
    let one = SphericalHarmonicsLighting::ambient(1.0);
    let mut rng = derive_stream(101, "acceptance-shade", &[]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let albedo: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let s = one.shade(albedo, &random_unit(&mut rng)).unwrap();
        for c in 0..3 {
            worst = worst.max((s[c] - albedo[c]).abs());
        }
    }
    Outcome {
        name: "shading anchor",
        pass: worst <= 1e-6,
        detail: format!("max |shade - albedo| {worst:.1e} over 100 pairs (<=1e-6)"),
        enforced: true,
    }
}

fn rasterizer_oracle() -> Outcome {
    let mut rng = derive_stream(102, "acceptance-raster", &[]);
    let mut mismatches = 0;
    let mut covered = 0;
    for k in 0..100 {
        let tri = random_triangle(&mut rng, k % 2 == 1);
        let mut got = std::collections::BTreeSet::new();
        for_each_covered_pixel(tri.map(|p| snap(p).unwrap()), 64, 64, |x, y, _| {
            got.insert((x, y));
        });
        let expected = oracle_coverage(tri, 64, 64);
        covered += expected.len();
        mismatches += got.symmetric_difference(&expected).count();
    }
    Outcome {
        name: "rasterizer oracle",
        pass: mismatches == 0,
        detail: format!(
            "{mismatches} mismatched pixels over 100 triangles at 64x64 ({covered} covered)"
        ),
        enforced: true,
    }
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_owned(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn cli_generate(preset: &str, out: &Path, threads: usize) -> Duration {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_facesynth"))
        .args([
            "generate",
            "--preset",
            preset,
            "--scale",
            "1000",
            "--threads",
            &threads.to_string(),
            "--out",
        ])
        .arg(out)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    elapsed
}

fn read_annotations(dir: &Path) -> Vec<SampleAnnotation> {
    let manifest: DatasetManifest =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    manifest
        .records
        .iter()
        .map(|r| serde_json::from_slice(&std::fs::read(dir.join(&r.annotation)).unwrap()).unwrap())
        .collect()
}

struct GenerationRuns {
    determinism: Outcome,
    recipe: Outcome,
    performance: Outcome,
}

fn generation_runs(tmp: &Path) -> GenerationRuns {
    let (a, b, c) = (tmp.join("a"), tmp.join("b"), tmp.join("c"));
    let t1 = cli_generate("syn-1m", &a, 1);
    let t1b = cli_generate("syn-1m", &b, 1);
    let t8 = cli_generate("syn-1m", &c, 8);
    let sa = snapshot(&a);
    let repeat_identical = sa == snapshot(&b);
    let threads_identical = sa == snapshot(&c);
    let images = sa
        .keys()
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .count();
    let slowest = t1.max(t1b).max(t8);
    let determinism = Outcome {
        name: "determinism",
        pass: repeat_identical && threads_identical && images == 1000 && slowest < Duration::from_secs(300),
        detail: format!(
            "syn-1m --scale 1000: {images} images, repeat identical {repeat_identical}, 1 vs 8 threads identical {threads_identical}, slowest run {:.1}s (<300s)",
            slowest.as_secs_f64()
        ),
        enforced: true,
    };

    let anns = read_annotations(&a);
    let r = PoseRanges::from_degrees([-90.0, 90.0], [-30.0, 30.0], [-15.0, 15.0]).unwrap();
    let violations = anns
        .iter()
        .filter(|x| {
            !(r.yaw.contains(x.yaw, 0.0)
                && r.pitch.contains(x.pitch, 0.0)
                && r.roll.contains(x.roll, 0.0))
        })
        .count();
    let mut bins = [0usize; 9];
    for x in &anns {
        let k = ((x.yaw.to_degrees() + 90.0) / 20.0) as usize;
        bins[k.min(8)] += 1;
    }
    let n = anns.len() as f64;
    let (mean, sd) = (n / 9.0, (n * (1.0 / 9.0) * (8.0 / 9.0)).sqrt());
    let worst_z = bins
        .iter()
        .map(|&c| (c as f64 - mean).abs() / sd)
        .fold(0.0, f64::max);
    let front = tmp.join("front");
    cli_generate("syn-front", &front, 1);
    let front_anns = read_annotations(&front);
    let limit = 35f64.to_radians();
    let front_out = front_anns.iter().filter(|x| x.yaw.abs() > limit).count();
    let recipe = Outcome {
        name: "recipe fidelity",
        pass: anns.len() == 1000 && violations == 0 && worst_z <= 4.0 && front_anns.len() == 1000 && front_out == 0,
        detail: format!(
            "syn-1m n={}: {violations} range violations, yaw bins {bins:?}, max |z| {worst_z:.2} (<=4); syn-front n={}: {front_out} yaws outside ±35°",
            anns.len(),
            front_anns.len()
        ),
        enforced: true,
    };

    let speedup = t1.as_secs_f64() / t8.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let performance = Outcome {
        name: "performance",
        pass: speedup >= 3.0 && threads_identical,
        detail: format!(
            "1000 images at 128x128: 1 worker {:.1}s, 8 workers {:.1}s, speedup {speedup:.2}x (>=3x), outputs identical {threads_identical}, {cores} hardware threads available{}",
            t1.as_secs_f64(),
            t8.as_secs_f64(),
            if cores < 8 { " (not enforced below 8)" } else { "" }
        ),
        enforced: cores >= 8,
    };
    GenerationRuns {
        determinism,
        recipe,
        performance,
    }
}

fn sampling_statistics() -> Outcome {
    let config = Preset::Syn1M.config(1, 0).unwrap();
    let model = build_toy_model(&ToyModelSpec::with_seed(0)).unwrap();
    let n = 100_000;
    let k = model.shape().component_count() + model.color().component_count();
    let (mut sum, mut sq) = (vec![0.0; k], vec![0.0; k]);
    for j in 0..n {
        let (s, c) = identity_params(&config, &model, j);
        for (i, v) in s.iter().chain(&c).enumerate() {
            sum[i] += v;
            sq[i] += v * v;
        }
    }
    let means: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
    let stds: Vec<f64> = sq
        .iter()
        .zip(&means)
        .map(|(q, m)| (q / n as f64 - m * m).sqrt())
        .collect();
    let worst_mean = means.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let (lo, hi) = stds
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
    Outcome {
        name: "sampling statistics",
        pass: worst_mean <= 0.02 && lo >= 0.97 && hi <= 1.00,
        detail: format!("{n} identity draws x {k} coefficients at sigma_max=3: max |mean| {worst_mean:.4} (<=0.02), std in [{lo:.4}, {hi:.4}] (within [0.97, 1.00])"),
        enforced: true,
    }
}

fn split(scores: &[f64], same: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let pos = scores
        .iter()
        .zip(same)
        .filter(|(_, &l)| l)
        .map(|(s, _)| *s)
        .collect();
    let neg = scores
        .iter()
        .zip(same)
        .filter(|(_, &l)| !l)
        .map(|(s, _)| *s)
        .collect();
    (pos, neg)
}

#[allow(clippy::approx_constant)]
fn eval_oracle() -> Outcome {
    let mut rng = derive_stream(103, "acceptance-eval", &[]);
    let mut failures = 0;
    for k in 0..50 {
        let n = rng.random_range(20..=100);
        let inst = random_instance(&mut rng, n, k % 2 == 0);
        let (pos, neg) = split(&inst.scores, &inst.same);
        let curve = compute_roc(&pos, &neg).unwrap();
        let points: Vec<_> = curve
            .points()
            .iter()
            .map(|p| (p.threshold, p.far, p.tar))
            .collect();
        failures += usize::from(points != roc_oracle(&pos, &neg));
        failures += usize::from(tar_at_far(&curve, 0.1) != tar_at_far_oracle(&pos, &neg, 0.1));
        for folds in [2, 10] {
            let fold_of = random_folds(&mut rng, n, folds);
            let cv =
                cross_validated_accuracy_from_scores(&inst.scores, &inst.same, &fold_of, folds)
                    .unwrap();
            failures += usize::from(
                cv.fold_accuracies() != cv_oracle(&inst.scores, &inst.same, &fold_of, folds),
            );
        }
    }
    let unit = [
        (
            cosine_similarity(&[0.3, -2.0, 1.0], &[0.3, -2.0, 1.0]).unwrap(),
            1.0,
        ),
        (cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0),
        (
            cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap(),
            0.707_106_8,
        ),
    ];
    let unit_err = unit.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Outcome {
        name: "evaluation oracle equivalence",
        pass: failures == 0 && unit_err <= 1e-6,
        detail: format!("{failures} mismatches over 50 instances (ROC, TAR@FAR 0.1, 2- and 10-fold); cosine unit cases max err {unit_err:.1e} (<=1e-6)"),
        enforced: true,
    }
}

fn end_to_end(tmp: &Path) -> Outcome {
    let mut config: GenerationConfig = Preset::Syn1M.config(1, 77).unwrap();
    config.identity_count = 20;
    config.samples_per_identity = 10;
    let dir = tmp.join("e2e");
    generate_dataset(
        &config,
        &dir,
        &GenerateOptions {
            threads: 2,
            resume: false,
        },
    )
    .unwrap();
    let anns = read_annotations(&dir);

    // 300 same and 300 different pairs, shuffled into contiguous folds
    let mut rng = derive_stream(104, "acceptance-pairs", &[]);
    let id = |a: &SampleAnnotation| format!("{}/{}", a.identity_id, a.sample_id);
    let mut pairs = Vec::new();
    while pairs.len() < 600 {
        let want_same = pairs.len() % 2 == 0;
        let a = &anns[rng.random_range(0..anns.len())];
        let b = &anns[rng.random_range(0..anns.len())];
        if std::ptr::eq(a, b) || (a.identity_id == b.identity_id) != want_same {
            continue;
        }
        pairs.push(Pair {
            id_a: id(a),
            id_b: id(b),
            same: want_same,
            fold: None,
        });
    }
    pairs.shuffle(&mut rng);
    let pairs = PairList::new(pairs).unwrap();

    let mut accuracies = Vec::new();
    for (s, noise) in [0.1, 1.0, 3.0].into_iter().enumerate() {
        let mut noise_rng = derive_stream(105, "acceptance-noise", &[s as u64]);
        let set = EmbeddingSet::new(anns.iter().map(|a| {
            let v: Vec<f64> = a
                .shape_coeffs
                .iter()
                .chain(&a.color_coeffs)
                .map(|c| c + noise * noise_rng.sample::<f64, _>(StandardNormal))
                .collect();
            (id(a), v)
        }))
        .unwrap();
        accuracies.push(
            cross_validated_accuracy(&pairs, &set, None, 1.0, 10)
                .unwrap()
                .mean_accuracy,
        );
    }
    let monotone = accuracies.windows(2).all(|w| w[1] <= w[0]);
    Outcome {
        name: "end-to-end pipeline",
        pass: anns.len() == 200 && monotone && accuracies[0] > 0.95,
        detail: format!(
            "20x10 toy dataset, 600 pairs, 10-fold accuracy at noise 0.1/1/3 = {:.4}/{:.4}/{:.4} (monotone {monotone}, >0.95 at 0.1)",
            accuracies[0], accuracies[1], accuracies[2]
        ),
        enforced: true,
    }
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outcomes = Vec::new();
    let mut record = |o: Outcome| {
        report(&o);
        outcomes.push(o);
    };
    record(reproducibility_statement());
    record(sh_correctness());
    record(shading_anchor());
    record(rasterizer_oracle());
    let runs = generation_runs(tmp.path());
    record(runs.determinism);
    record(runs.recipe);
    record(sampling_statistics());
    record(eval_oracle());
    record(end_to_end(tmp.path()));
    record(runs.performance);

    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| o.enforced && !o.pass)
        .map(|o| o.name)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
