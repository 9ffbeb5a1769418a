//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use facesynth::illumination::SphericalHarmonicsLighting;
use facesynth::model::Vec3;
use rand::seq::SliceRandom;
use rand::Rng;

// ---- spherical harmonics ----

/// Real SH written in spherical coordinates, independent of the crate's
/// Cartesian form.
pub fn sh_spherical(theta: f64, phi: f64) -> [f64; 9] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let c1 = (3.0 / (4.0 * PI)).sqrt();
    let c2 = 0.5 * (15.0 / PI).sqrt();
    [
        0.5 / PI.sqrt(),
        c1 * st * sp,
        c1 * ct,
        c1 * st * cp,
        0.25 * (15.0 / PI).sqrt() * st * st * (2.0 * phi).sin(),
        c2 * st * ct * sp,
        0.25 * (5.0 / PI).sqrt() * (3.0 * ct * ct - 1.0),
        c2 * st * ct * cp,
        0.25 * (15.0 / PI).sqrt() * st * st * (2.0 * phi).cos(),
    ]
}

pub fn to_spherical(d: &Vec3) -> (f64, f64) {
    (d.z.clamp(-1.0, 1.0).acos(), d.y.atan2(d.x))
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Lighting with a dominant ambient term so irradiance stays well above 0.
pub fn random_lighting<R: Rng>(rng: &mut R) -> SphericalHarmonicsLighting {
    let mut l = SphericalHarmonicsLighting::ZERO;
    for ch in &mut l.coeffs {
        ch[0] = rng.random_range(1.0..3.0);
        for c in &mut ch[1..] {
            *c = rng.random_range(-0.3..0.3);
        }
    }
    l
}

/// `∫_{n·ω>0} L(ω) (n·ω) dω` by cosine-weighted sampling: `π · mean L(ω)`.
pub fn monte_carlo_irradiance<R: Rng>(
    l: &SphericalHarmonicsLighting,
    n: &Vec3,
    samples: usize,
    rng: &mut R,
) -> [f64; 3] {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let t = n.cross(&helper).normalize();
    let b = n.cross(&t);
    let mut sum = [0.0; 3];
    for _ in 0..samples {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let r = u1.sqrt();
        let phi = 2.0 * PI * u2;
        let w = t * (r * phi.cos()) + b * (r * phi.sin()) + n * (1.0 - u1).max(0.0).sqrt();
        let (th, ph) = to_spherical(&w);
        let y = sh_spherical(th, ph);
        for (acc, ch) in sum.iter_mut().zip(&l.coeffs) {
            *acc += ch.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    sum.map(|s| PI * s / samples as f64)
}

// ---- rasterization ----

/// Sign of the edge function at the pixel center nudged by `(ε, ε²)`,
/// evaluated lexicographically in ε. Ties on an edge resolve exactly as if
/// the sample sat infinitesimally right of and below the center.
fn perturbed_sign(a: [i128; 2], b: [i128; 2], p: [i128; 2]) -> i128 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let w = e[0] * (p[1] - a[1]) - e[1] * (p[0] - a[0]);
    if w != 0 {
        return w.signum();
    }
    if e[1] != 0 {
        return (-e[1]).signum();
    }
    e[0].signum()
}

/// Pixels whose centers lie in the triangle after snapping to 1/256 px.
pub fn oracle_coverage(tri: [[f64; 2]; 3], w: u32, h: u32) -> BTreeSet<(u32, u32)> {
    let s = tri.map(|p| {
        [
            (p[0] * 256.0).round() as i128,
            (p[1] * 256.0).round() as i128,
        ]
    });
    let area =
        (s[1][0] - s[0][0]) * (s[2][1] - s[0][1]) - (s[1][1] - s[0][1]) * (s[2][0] - s[0][0]);
    let mut out = BTreeSet::new();
    if area == 0 {
        return out;
    }
    for y in 0..h {
        for x in 0..w {
            let p = [i128::from(x) * 256 + 128, i128::from(y) * 256 + 128];
            let signs = [
                perturbed_sign(s[0], s[1], p),
                perturbed_sign(s[1], s[2], p),
                perturbed_sign(s[2], s[0], p),
            ];
            if signs.iter().all(|&g| g == area.signum()) {
                out.insert((x, y));
            }
        }
    }
    out
}

/// Vertices in `[-8, 72)²`; `lattice` snaps them to half pixels so edges
/// pass exactly through pixel centers.
pub fn random_triangle<R: Rng>(rng: &mut R, lattice: bool) -> [[f64; 2]; 3] {
    let mut coord = || {
        let v: f64 = rng.random_range(-8.0..72.0);
        if lattice {
            (v * 2.0).round() / 2.0
        } else {
            v
        }
    };
    [[coord(), coord()], [coord(), coord()], [coord(), coord()]]
}

pub fn srgb_oracle(v: f64) -> u8 {
    let v = v.clamp(0.0, 1.0);
    let s = if v <= 0.0031308 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0 + 0.5).floor() as u8
}

// ---- verification metrics ----

pub struct ScoreInstance {
    pub scores: Vec<f64>,
    pub same: Vec<bool>,
}

/// `n` labelled scores with both labels present; `ties` quantizes scores so
/// equal values are common.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, ties: bool) -> ScoreInstance {
    assert!(n >= 2);
    loop {
        let same: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        if same.iter().all(|&s| s) || same.iter().all(|&s| !s) {
            continue;
        }
        let scores = same
            .iter()
            .map(|&s| {
                let v: f64 = rng.random_range(-1.0..1.0) + if s { 0.3 } else { 0.0 };
                if ties {
                    (v * 8.0).round() / 8.0
                } else {
                    v
                }
            })
            .collect();
        return ScoreInstance { scores, same };
    }
}

fn rate(scores: &[f64], t: f64) -> f64 {
    scores.iter().filter(|&&s| s >= t).count() as f64 / scores.len() as f64
}

/// `(threshold, far, tar)` at every distinct score plus `+inf`, descending.
pub fn roc_oracle(pos: &[f64], neg: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut ts: Vec<f64> = pos.iter().chain(neg).copied().collect();
    ts.push(f64::INFINITY);
    ts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ts.dedup();
    ts.into_iter()
        .map(|t| (t, rate(neg, t), rate(pos, t)))
        .collect()
}

/// Scan every threshold (each score, each midpoint, ±inf) for the largest
/// FAR not above the target; report the best TAR there.
pub fn tar_at_far_oracle(pos: &[f64], neg: &[f64], target: f64) -> f64 {
    let mut all: Vec<f64> = pos.iter().chain(neg).copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ts = all.clone();
    ts.extend(all.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    ts.extend([f64::INFINITY, f64::NEG_INFINITY]);
    let mut best: Option<(f64, f64)> = None;
    for t in ts {
        let (far, tar) = (rate(neg, t), rate(pos, t));
        if far <= target && best.is_none_or(|b| far > b.0 || (far == b.0 && tar > b.1)) {
            best = Some((far, tar));
        }
    }
    best.map_or(0.0, |b| b.1)
}

fn accuracy(scores: &[f64], same: &[bool], t: f64) -> usize {
    scores
        .iter()
        .zip(same)
        .filter(|(&s, &l)| (s >= t) == l)
        .count()
}

/// Per-fold accuracies by exhaustive search: for each held-out fold, try
/// accepting everything and every threshold just above a training score,
/// keeping the smallest one with the most correct training decisions.
pub fn cv_oracle(scores: &[f64], same: &[bool], fold_of: &[usize], folds: usize) -> Vec<f64> {
    (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..scores.len()).filter(|&k| fold_of[k] != f).collect();
            let ts: Vec<f64> = train.iter().map(|&k| scores[k]).collect();
            let tl: Vec<bool> = train.iter().map(|&k| same[k]).collect();
            let mut cands: Vec<f64> = ts.iter().map(|s| s.next_up()).collect();
            cands.push(f64::NEG_INFINITY);
            let mut best = (f64::INFINITY, 0);
            for t in cands {
                let a = accuracy(&ts, &tl, t);
                if a > best.1 || (a == best.1 && t < best.0) {
                    best = (t, a);
                }
            }
            let test: Vec<usize> = (0..scores.len()).filter(|&k| fold_of[k] == f).collect();
            let correct = test
                .iter()
                .filter(|&&k| (scores[k] >= best.0) == same[k])
                .count();
            correct as f64 / test.len() as f64
        })
        .collect()
}

/// Every fold non-empty, otherwise random.
pub fn random_folds<R: Rng>(rng: &mut R, n: usize, folds: usize) -> Vec<usize> {
    let mut f: Vec<usize> = (0..n).map(|k| k % folds).collect();
    f.shuffle(rng);
    f
}
