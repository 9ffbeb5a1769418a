use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mesh::{FaceMesh, TriangleTopology, Vec3};
use super::pca::PrincipalComponentModel;
use super::ModelError;

/// Largest per-coordinate magnitude tolerated in the expression mean.
pub const EXPRESSION_MEAN_TOLERANCE: f64 = 1e-9;

/// Shape, color and expression models over one shared triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphableFaceModel {
    shape: PrincipalComponentModel,
    color: PrincipalComponentModel,
    expression: PrincipalComponentModel,
    topology: TriangleTopology,
}

impl MorphableFaceModel {
    pub fn new(
        shape: PrincipalComponentModel,
        color: PrincipalComponentModel,
        expression: PrincipalComponentModel,
        topology: TriangleTopology,
    ) -> Result<Self, ModelError> {
        let n = shape.vertex_count();
        for (attribute, m) in [("color", &color), ("expression", &expression)] {
            if m.vertex_count() != n {
                return Err(ModelError::VertexCountMismatch {
                    attribute,
                    expected: n,
                    actual: m.vertex_count(),
                });
            }
        }
        if let Some(index) = expression
            .mean()
            .iter()
            .position(|&v| f64::from(v).abs() > EXPRESSION_MEAN_TOLERANCE)
        {
            return Err(ModelError::NonZeroExpressionMean { index });
        }
        Ok(Self {
            shape,
            color,
            expression,
            topology,
        })
    }

    pub fn shape(&self) -> &PrincipalComponentModel {
        &self.shape
    }

    pub fn color(&self) -> &PrincipalComponentModel {
        &self.color
    }

    pub fn expression(&self) -> &PrincipalComponentModel {
        &self.expression
    }

    pub fn topology(&self) -> &TriangleTopology {
        &self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.shape.vertex_count()
    }

    /// Build the mesh for `params`.
    ///
    /// Positions are `shape.mean + shape.basis·(s ⊙ σ_s) + expression.basis·(e ⊙ σ_e)`;
    /// colors are `color.mean + color.basis·(c ⊙ σ_c)`. Normals are recomputed.
    pub fn instantiate(&self, params: &FaceInstanceParams) -> Result<FaceMesh, ModelError> {
        let checks = [
            ("shape", &self.shape, &params.shape_coeffs),
            ("color", &self.color, &params.color_coeffs),
            ("expression", &self.expression, &params.expression_coeffs),
        ];
        for (attribute, model, coeffs) in checks {
            if model.component_count() != coeffs.len() {
                return Err(ModelError::CoefficientCount {
                    attribute,
                    expected: model.component_count(),
                    actual: coeffs.len(),
                });
            }
        }
        let mut positions = self.shape.evaluate(&params.shape_coeffs);
        self.expression
            .accumulate_offset(&params.expression_coeffs, &mut positions);
        let colors = self.color.evaluate(&params.color_coeffs);
        Ok(FaceMesh::new(
            to_points(&positions),
            to_points(&colors),
            self.topology.clone(),
        ))
    }
}

fn to_points(flat: &[f64]) -> Vec<Vec3> {
    flat.chunks_exact(3)
        .map(|c| Vec3::new(c[0], c[1], c[2]))
        .collect()
}

/// Standardized (z-score) coefficients of one face instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceInstanceParams {
    pub shape_coeffs: Vec<f64>,
    pub color_coeffs: Vec<f64>,
    pub expression_coeffs: Vec<f64>,
}

impl FaceInstanceParams {
    /// All-zero coefficients: the mean face with neutral expression.
    pub fn mean(model: &MorphableFaceModel) -> Self {
        Self {
            shape_coeffs: vec![0.0; model.shape().component_count()],
            color_coeffs: vec![0.0; model.color().component_count()],
            expression_coeffs: vec![0.0; model.expression().component_count()],
        }
    }
}

/// Rejection bound for standardized coefficients, in standard deviations.
///
/// Bounds below 0.5 are rejected so rejection sampling always terminates in a
/// handful of draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Truncation(f64);

impl Truncation {
    pub const MIN: f64 = 0.5;
    pub const DEFAULT: Truncation = Truncation(3.0);

    pub fn new(sigma_max: f64) -> Result<Self, ModelError> {
        if sigma_max.is_finite() && sigma_max >= Self::MIN {
            Ok(Self(sigma_max))
        } else {
            Err(ModelError::InvalidTruncation(sigma_max))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for Truncation {
    type Error = ModelError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Truncation> for f64 {
    fn from(t: Truncation) -> f64 {
        t.0
    }
}

/// `count` independent standard-normal draws, each redrawn until `|x| ≤ σ_max`.
pub fn sample_coeffs<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    truncation: Truncation,
) -> Vec<f64> {
    let bound = truncation.get();
    (0..count)
        .map(|_| loop {
            let x: f64 = rng.sample(StandardNormal);
            if x.abs() <= bound {
                break x;
            }
        })
        .collect()
}
