use nalgebra::Vector3;

use super::ModelError;

pub type Vec3 = Vector3<f64>;

/// Triangle connectivity shared by every instance of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleTopology {
    triangles: Vec<[u32; 3]>,
}

impl TriangleTopology {
    /// Validate `triangles` against `vertex_count`.
    pub fn new(triangles: Vec<[u32; 3]>, vertex_count: usize) -> Result<Self, ModelError> {
        for (index, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v as usize >= vertex_count) {
                return Err(ModelError::TriangleIndexOutOfRange {
                    triangle: index,
                    vertex_count,
                });
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(ModelError::RepeatedTriangleIndex { triangle: index });
            }
        }
        Ok(Self { triangles })
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }
}

/// An instantiated face: positions in millimetres (model coordinates),
/// per-vertex linear-RGB albedo and unit vertex normals.
#[derive(Debug, Clone)]
pub struct FaceMesh {
    pub positions: Vec<Vec3>,
    pub colors: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub topology: TriangleTopology,
}

impl FaceMesh {
    /// Assemble a mesh, recomputing normals from the geometry.
    pub fn new(positions: Vec<Vec3>, colors: Vec<Vec3>, topology: TriangleTopology) -> Self {
        let normals = compute_vertex_normals(&positions, &topology);
        Self {
            positions,
            colors,
            normals,
            topology,
        }
    }
}

/// Area-weighted vertex normals. Vertices without a non-degenerate incident
/// triangle get `(0, 0, 1)`.
pub fn compute_vertex_normals(positions: &[Vec3], topology: &TriangleTopology) -> Vec<Vec3> {
    let mut sums = vec![Vec3::zeros(); positions.len()];
    for t in topology.triangles() {
        let [a, b, c] = t.map(|i| i as usize);
        // |cross| = 2 * area, so the raw cross product is already area-weighted.
        let n = (positions[b] - positions[a]).cross(&(positions[c] - positions[a]));
        sums[a] += n;
        sums[b] += n;
        sums[c] += n;
    }
    sums.into_iter()
        .map(|s| {
            let len = s.norm();
            if len > 0.0 && len.is_finite() {
                s / len
            } else {
                Vec3::new(0.0, 0.0, 1.0)
            }
        })
        .collect()
}
