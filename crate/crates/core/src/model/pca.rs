use super::ModelError;

/// Tolerance for the orthonormality check applied to every loaded basis.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-6;

/// A linear Gaussian generative model: `mean + basis * (z ⊙ stddevs)` with
/// `z ~ N(0, I)`.
///
/// Values are stored as `f32`, the precision of the on-disk format, so a
/// model held in memory is exactly the model that would be written out.
/// The basis is column-major: column `k` occupies
/// `basis[k * 3N .. (k + 1) * 3N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponentModel {
    mean: Vec<f32>,
    basis: Vec<f32>,
    stddevs: Vec<f32>,
    vertex_count: usize,
}

impl PrincipalComponentModel {
    /// Build a model, validating every invariant. `attribute` names the model
    /// in error messages ("shape", "color", ...).
    pub fn new(
        attribute: &'static str,
        vertex_count: usize,
        mean: Vec<f32>,
        basis: Vec<f32>,
        stddevs: Vec<f32>,
    ) -> Result<Self, ModelError> {
        let rows = 3 * vertex_count;
        if vertex_count == 0 {
            return Err(ModelError::Empty { attribute });
        }
        if mean.len() != rows {
            return Err(ModelError::MeanLength {
                attribute,
                expected: rows,
                actual: mean.len(),
            });
        }
        let k = stddevs.len();
        if k == 0 {
            return Err(ModelError::NoComponents { attribute });
        }
        if basis.len() != rows * k {
            return Err(ModelError::BasisShape {
                attribute,
                expected_rows: rows,
                components: k,
                actual_len: basis.len(),
            });
        }
        if let Some(index) = mean.iter().chain(&basis).position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { attribute, index });
        }
        for (index, &s) in stddevs.iter().enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(ModelError::NonPositiveStddev {
                    attribute,
                    index,
                    value: s,
                });
            }
            if index > 0 && s > stddevs[index - 1] {
                return Err(ModelError::IncreasingStddev { attribute, index });
            }
        }
        let model = Self {
            mean,
            basis,
            stddevs,
            vertex_count,
        };
        model.check_orthonormal(attribute)?;
        Ok(model)
    }

    fn check_orthonormal(&self, attribute: &'static str) -> Result<(), ModelError> {
        let k = self.component_count();
        for i in 0..k {
            let ci = self.column(i);
            for j in i..k {
                let cj = self.column(j);
                let dot: f64 = ci
                    .iter()
                    .zip(cj)
                    .map(|(&a, &b)| f64::from(a) * f64::from(b))
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot - expected).abs() > ORTHONORMALITY_TOLERANCE {
                    return Err(ModelError::NotOrthonormal {
                        attribute,
                        i,
                        j,
                        dot,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn component_count(&self) -> usize {
        self.stddevs.len()
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    pub fn basis(&self) -> &[f32] {
        &self.basis
    }

    pub fn stddevs(&self) -> &[f32] {
        &self.stddevs
    }

    /// Column `k` of the basis (length 3N).
    pub fn column(&self, k: usize) -> &[f32] {
        let rows = 3 * self.vertex_count;
        &self.basis[k * rows..(k + 1) * rows]
    }

    /// `basis * (coeffs ⊙ stddevs)` accumulated into `out` (length 3N).
    pub(crate) fn accumulate_offset(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.component_count());
        debug_assert_eq!(out.len(), 3 * self.vertex_count);
        for (k, (&c, &s)) in coeffs.iter().zip(&self.stddevs).enumerate() {
            let weight = c * f64::from(s);
            if weight == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.column(k)) {
                *o += weight * f64::from(b);
            }
        }
    }

    /// `mean + basis * (coeffs ⊙ stddevs)` in double precision.
    pub fn evaluate(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.mean.iter().map(|&m| f64::from(m)).collect();
        self.accumulate_offset(coeffs, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_model() -> (Vec<f32>, Vec<f32>, Vec<f32>) {
        // N = 1, two components along x and y.
        let mean = vec![1.0, 2.0, 3.0];
        let basis = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        (mean, basis, vec![2.0, 0.5])
    }

    #[test]
    fn accepts_valid_model() {
        let (m, b, s) = axis_model();
        let model = PrincipalComponentModel::new("shape", 1, m, b, s).unwrap();
        assert_eq!(model.evaluate(&[1.0, -2.0]), vec![3.0, 1.0, 3.0]);
    }

    #[test]
    fn rejects_increasing_stddevs() {
        let (m, b, _) = axis_model();
        let err = PrincipalComponentModel::new("shape", 1, m, b, vec![0.5, 2.0]).unwrap_err();
        assert!(matches!(err, ModelError::IncreasingStddev { index: 1, .. }));
    }

    #[test]
    fn rejects_zero_stddev() {
        let (m, b, _) = axis_model();
        let err = PrincipalComponentModel::new("shape", 1, m, b, vec![1.0, 0.0]).unwrap_err();
        assert!(matches!(
            err,
            ModelError::NonPositiveStddev { index: 1, .. }
        ));
    }

    #[test]
    fn rejects_skewed_basis() {
        let (m, mut b, s) = axis_model();
        b[3] = 1e-2;
        let err = PrincipalComponentModel::new("color", 1, m, b, s).unwrap_err();
        assert!(matches!(err, ModelError::NotOrthonormal { i: 0, j: 1, .. }));
        assert!(err.to_string().contains("orthonormal"));
    }

    #[test]
    fn rejects_wrong_mean_length() {
        let (_, b, s) = axis_model();
        let err = PrincipalComponentModel::new("shape", 1, vec![0.0; 4], b, s).unwrap_err();
        assert!(matches!(err, ModelError::MeanLength { expected: 3, .. }));
    }
}
