//! Statistical face model: PCA attribute models, mesh instantiation,
//! coefficient sampling, the procedural toy model and the `.pcmf` format.

mod face;
mod io;
mod mesh;
mod pca;
mod toy;

use std::path::PathBuf;

pub use face::{sample_coeffs, FaceInstanceParams, MorphableFaceModel, Truncation};
pub use io::{decode_model, encode_model, load_model, save_model};
pub use mesh::{compute_vertex_normals, FaceMesh, TriangleTopology, Vec3};
pub use pca::{PrincipalComponentModel, ORTHONORMALITY_TOLERANCE};
pub use toy::{
    build_toy_model, ToyModelSpec, DEFAULT_COMPONENTS, DEFAULT_VERTEX_BUDGET, MIN_VERTEX_BUDGET,
};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{attribute} model has no vertices")]
    Empty { attribute: &'static str },
    #[error("{attribute} model has no components")]
    NoComponents { attribute: &'static str },
    #[error("{attribute} mean has length {actual}, expected 3 * vertex_count = {expected}")]
    MeanLength {
        attribute: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{attribute} basis has {actual_len} values, expected {expected_rows} rows x {components} components")]
    BasisShape {
        attribute: &'static str,
        expected_rows: usize,
        components: usize,
        actual_len: usize,
    },
    #[error("{attribute} model contains a non-finite value at index {index}")]
    NonFinite {
        attribute: &'static str,
        index: usize,
    },
    #[error("{attribute} stddev {index} is {value}, must be strictly positive")]
    NonPositiveStddev {
        attribute: &'static str,
        index: usize,
        value: f32,
    },
    #[error("{attribute} stddevs must be non-increasing (violated at index {index})")]
    IncreasingStddev {
        attribute: &'static str,
        index: usize,
    },
    #[error("{attribute} basis is not orthonormal: <b{i}, b{j}> = {dot}")]
    NotOrthonormal {
        attribute: &'static str,
        i: usize,
        j: usize,
        dot: f64,
    },
    #[error("{attribute} model has {actual} vertices, shape model has {expected}")]
    VertexCountMismatch {
        attribute: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("expression mean must be zero (coordinate {index} is not)")]
    NonZeroExpressionMean { index: usize },
    #[error("triangle {triangle} references a vertex >= {vertex_count}")]
    TriangleIndexOutOfRange {
        triangle: usize,
        vertex_count: usize,
    },
    #[error("triangle {triangle} repeats a vertex index")]
    RepeatedTriangleIndex { triangle: usize },
    #[error("expected {expected} {attribute} coefficients, got {actual}")]
    CoefficientCount {
        attribute: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("truncation bound {0} is invalid (must be finite and >= 0.5)")]
    InvalidTruncation(f64),
    #[error("vertex budget {0} is below the minimum of 100")]
    VertexBudget(usize),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),
    #[error("model file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("model file has trailing data: expected {expected} bytes, found {actual}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("model file header describes an impossibly large payload")]
    HeaderOverflow,
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
