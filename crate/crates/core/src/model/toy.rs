//! Procedural stand-in for a scanned face model.
//!
//! The mean shape is a latitude/longitude tessellated ellipsoid (semi-axes
//! 100 × 140 × 104 mm) with a nose ridge, two eye sockets and a mouth groove
//! pushed along the surface normal. Each basis column is a sum of a few
//! low-frequency sinusoids over the unit-sphere parameterisation, made
//! orthonormal with two passes of modified Gram-Schmidt and rounded to `f32`.
//! Expression columns are windowed around the mouth and cheeks. Everything
//! is drawn from streams derived from the seed, so a seed fixes the model
//! bit for bit.

use rand::Rng;
use rand_distr::StandardNormal;

use super::face::MorphableFaceModel;
use super::mesh::{TriangleTopology, Vec3};
use super::pca::PrincipalComponentModel;
use super::ModelError;
use crate::stream::{derive_stream, RandomStream};

pub const MIN_VERTEX_BUDGET: usize = 100;
pub const DEFAULT_VERTEX_BUDGET: usize = 2000;
pub const DEFAULT_COMPONENTS: usize = 20;

const SEMI_AXES: [f64; 3] = [100.0, 140.0, 104.0];

/// Parameters of [`build_toy_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyModelSpec {
    pub seed: u64,
    pub vertex_budget: usize,
    pub shape_components: usize,
    pub color_components: usize,
    pub expression_components: usize,
}

impl ToyModelSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
            shape_components: DEFAULT_COMPONENTS,
            color_components: DEFAULT_COMPONENTS,
            expression_components: DEFAULT_COMPONENTS / 2,
        }
    }
}

struct Feature {
    direction: [f64; 3],
    width: f64,
    amplitude_mm: f64,
}

const FEATURES: [Feature; 5] = [
    // nose
    Feature {
        direction: [0.0, -0.08, 1.0],
        width: 0.17,
        amplitude_mm: 16.0,
    },
    // eye sockets
    Feature {
        direction: [0.36, 0.2, 0.91],
        width: 0.13,
        amplitude_mm: -8.0,
    },
    Feature {
        direction: [-0.36, 0.2, 0.91],
        width: 0.13,
        amplitude_mm: -8.0,
    },
    // mouth groove
    Feature {
        direction: [0.0, -0.42, 0.9],
        width: 0.1,
        amplitude_mm: -3.0,
    },
    // chin
    Feature {
        direction: [0.0, -0.72, 0.69],
        width: 0.2,
        amplitude_mm: 5.0,
    },
];

fn normalize(v: [f64; 3]) -> Vec3 {
    Vec3::from(v).normalize()
}

fn bump(unit: &Vec3, feature: &Feature) -> f64 {
    let d = (unit - normalize(feature.direction)).norm_squared();
    feature.amplitude_mm * (-d / (2.0 * feature.width * feature.width)).exp()
}

/// Latitude/longitude sphere: unit directions plus outward-wound triangles.
fn unit_sphere_grid(vertex_budget: usize) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let rings = (((vertex_budget - 2) / 2) as f64).sqrt().floor() as usize;
    let segments = 2 * rings;
    let mut dirs = Vec::with_capacity(rings * segments + 2);
    dirs.push(Vec3::new(0.0, 1.0, 0.0));
    for r in 0..rings {
        let theta = std::f64::consts::PI * (r + 1) as f64 / (rings + 1) as f64;
        for s in 0..segments {
            let phi = 2.0 * std::f64::consts::PI * s as f64 / segments as f64;
            dirs.push(Vec3::new(
                theta.sin() * phi.sin(),
                theta.cos(),
                theta.sin() * phi.cos(),
            ));
        }
    }
    dirs.push(Vec3::new(0.0, -1.0, 0.0));
    let bottom = (dirs.len() - 1) as u32;
    let at = |r: usize, s: usize| (1 + r * segments + s % segments) as u32;

    let mut tris = Vec::with_capacity(2 * rings * segments);
    for s in 0..segments {
        tris.push([0, at(0, s), at(0, s + 1)]);
    }
    for r in 0..rings - 1 {
        for s in 0..segments {
            let (a, b, c, d) = (at(r, s), at(r + 1, s), at(r, s + 1), at(r + 1, s + 1));
            tris.push([a, b, c]);
            tris.push([c, b, d]);
        }
    }
    for s in 0..segments {
        tris.push([bottom, at(rings - 1, s + 1), at(rings - 1, s)]);
    }
    (dirs, tris)
}

fn mean_shape(dirs: &[Vec3]) -> Vec<f64> {
    let [a, b, c] = SEMI_AXES;
    let mut out = Vec::with_capacity(3 * dirs.len());
    for u in dirs {
        let base = Vec3::new(a * u.x, b * u.y, c * u.z);
        let normal = Vec3::new(u.x / a, u.y / b, u.z / c).normalize();
        let offset: f64 = FEATURES.iter().map(|f| bump(u, f)).sum();
        let p = base + normal * offset;
        out.extend([p.x, p.y, p.z]);
    }
    out
}

fn mean_color(dirs: &[Vec3]) -> Vec<f64> {
    let skin = [0.62, 0.42, 0.32];
    let lips = normalize([0.0, -0.42, 0.9]);
    let mut out = Vec::with_capacity(3 * dirs.len());
    for u in dirs {
        let shade = 0.92 + 0.08 * u.y;
        let socket: f64 = FEATURES[1..3].iter().map(|f| bump(u, f) / 8.0).sum();
        let lip = (-(u - lips).norm_squared() / 0.008).exp();
        let tint = [0.12 * lip, -0.08 * lip, -0.04 * lip];
        for ch in 0..3 {
            let v = skin[ch] * shade * (1.0 + 0.25 * socket) + tint[ch];
            out.push(v.clamp(0.02, 0.98));
        }
    }
    out
}

/// One smooth random vector field over the sphere, flattened to length 3N.
fn smooth_field(rng: &mut RandomStream, dirs: &[Vec3], window: impl Fn(&Vec3) -> f64) -> Vec<f64> {
    const TERMS: usize = 4;
    let mut waves = Vec::with_capacity(3 * TERMS);
    for _ in 0..3 * TERMS {
        let dir = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        )
        .normalize();
        let freq = rng.random_range(0.5..2.5);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let weight: f64 = rng.sample(StandardNormal);
        waves.push((dir * freq, phase, weight));
    }
    let mut out = Vec::with_capacity(3 * dirs.len());
    for u in dirs {
        let w = window(u);
        for axis in 0..3 {
            let v: f64 = waves[axis * TERMS..(axis + 1) * TERMS]
                .iter()
                .map(|(k, phase, weight)| weight * (k.dot(u) + phase).sin())
                .sum();
            out.push(v * w);
        }
    }
    out
}

fn orthonormalize(columns: &mut [Vec<f64>]) {
    for i in 0..columns.len() {
        for _pass in 0..2 {
            for j in 0..i {
                let (done, rest) = columns.split_at_mut(i);
                let dot: f64 = done[j].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
                for (x, q) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= dot * q;
                }
            }
            let norm = columns[i].iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in columns[i].iter_mut() {
                *x /= norm;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_component_model(
    attribute: &'static str,
    rng: &mut RandomStream,
    dirs: &[Vec3],
    mean: Vec<f64>,
    components: usize,
    leading_stddev: f64,
    decay: f64,
    window: impl Fn(&Vec3) -> f64 + Copy,
) -> Result<PrincipalComponentModel, ModelError> {
    let mut columns: Vec<Vec<f64>> = (0..components)
        .map(|_| smooth_field(rng, dirs, window))
        .collect();
    orthonormalize(&mut columns);
    let basis = columns.concat().into_iter().map(|x| x as f32).collect();
    let stddevs = (0..components)
        .map(|k| (leading_stddev * decay.powi(k as i32)) as f32)
        .collect();
    let mean = mean.into_iter().map(|x| x as f32).collect();
    PrincipalComponentModel::new(attribute, dirs.len(), mean, basis, stddevs)
}

/// Build a deterministic procedural face model.
pub fn build_toy_model(spec: &ToyModelSpec) -> Result<MorphableFaceModel, ModelError> {
    if spec.vertex_budget < MIN_VERTEX_BUDGET {
        return Err(ModelError::VertexBudget(spec.vertex_budget));
    }
    for (attribute, k) in [
        ("shape", spec.shape_components),
        ("color", spec.color_components),
        ("expression", spec.expression_components),
    ] {
        if k == 0 {
            return Err(ModelError::NoComponents { attribute });
        }
    }
    let (dirs, triangles) = unit_sphere_grid(spec.vertex_budget);
    let n = dirs.len();
    let sqrt_n = (n as f64).sqrt();
    let mouth = normalize([0.0, -0.35, 0.94]);

    let shape = build_component_model(
        "shape",
        &mut derive_stream(spec.seed, "toy-model", &[0]),
        &dirs,
        mean_shape(&dirs),
        spec.shape_components,
        4.0 * sqrt_n,
        0.85,
        |_| 1.0,
    )?;
    let color = build_component_model(
        "color",
        &mut derive_stream(spec.seed, "toy-model", &[1]),
        &dirs,
        mean_color(&dirs),
        spec.color_components,
        0.05 * sqrt_n,
        0.85,
        |_| 1.0,
    )?;
    let expression = build_component_model(
        "expression",
        &mut derive_stream(spec.seed, "toy-model", &[2]),
        &dirs,
        vec![0.0; 3 * n],
        spec.expression_components,
        3.0 * sqrt_n,
        0.8,
        move |u: &Vec3| (-(u - mouth).norm_squared() / 0.3).exp(),
    )?;
    let topology = TriangleTopology::new(triangles, n)?;
    MorphableFaceModel::new(shape, color, expression, topology)
}
