//! Invertible matrices with the spectral hemi-metric
//! `d(A, B) = ln sup_v |B^t v| / |A^t v|`.

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde_json::Value;

use crate::error::{domain, parameter, Result};
use crate::metric::Space;
use crate::spaces::euclidean::json_vector;
use crate::spectral::semicontraction::Semicontraction;

/// Dense decompositions are used up to this dimension.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpace {
    dim: usize,
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().max()
}

fn invertible(a: &DMatrix<f64>) -> bool {
    let sv = a.singular_values();
    sv.min() > 1e-13 * sv.max()
}

/// `ln sigma_max(B^t (A^t)^{-1})`.
pub fn operator_hemi_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    for m in [a, b] {
        if !m.is_square() || m.iter().any(|c| !c.is_finite()) || !invertible(m) {
            return Err(domain(
                "operator distance needs finite invertible square matrices",
            ));
        }
    }
    if a.shape() != b.shape() {
        return Err(domain("matrices have different sizes"));
    }
    Ok(raw_dist(a, b))
}

fn raw_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let at_inv = a.transpose().try_inverse().expect("validated invertible");
    operator_norm(&(b.transpose() * at_inv)).ln()
}

impl OperatorSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(parameter(format!("dimension must be in 1..={MAX_DIM}")));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Space for OperatorSpace {
    type Point = DMatrix<f64>;

    fn name(&self) -> String {
        format!("operator(dim={})", self.dim)
    }

    fn base_point(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn dist(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        raw_dist(x, y)
    }

    fn validate(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.shape() != (self.dim, self.dim) {
            return Err(domain(format!("expected a {0}x{0} matrix", self.dim)));
        }
        if x.iter().any(|c| !c.is_finite()) || !invertible(x) {
            return Err(domain("matrix is singular or non-finite"));
        }
        Ok(())
    }

    /// Matrices are arrays of rows.
    fn point_to_json(&self, x: &DMatrix<f64>) -> Value {
        Value::from(
            x.row_iter()
                .map(|r| r.iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
        )
    }

    fn point_from_json(&self, value: &Value) -> Result<DMatrix<f64>> {
        let m = json_matrix(value)?;
        self.validate(&m)?;
        Ok(m)
    }

    /// `2I + E` with `E` uniform in `[-1, 1]`, rejecting ill-conditioned draws.
    fn sample_point(&self, rng: &mut dyn RngCore) -> DMatrix<f64> {
        loop {
            let m = DMatrix::from_fn(self.dim, self.dim, |i, j| {
                rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 }
            });
            let sv = m.singular_values();
            if sv.min() > 1e-3 * sv.max() {
                return m;
            }
        }
    }

    /// `d(A, B) = 0` for `B = A U` with `U` a contraction that preserves some
    /// direction, so distinct points can be at distance zero.
    fn is_separating(&self) -> bool {
        false
    }

    fn points_equal(&self, x: &DMatrix<f64>, y: &DMatrix<f64>, tol: f64) -> bool {
        (x - y).amax() <= tol
    }
}

/// Parses a square matrix written as an array of rows.
pub fn json_matrix(value: &Value) -> Result<DMatrix<f64>> {
    let rows = value
        .as_array()
        .ok_or_else(|| domain("expected an array of rows"))?;
    let rows = rows.iter().map(json_vector).collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(domain("expected a nonempty square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// `B -> A B`, an isometry of the operator hemi-metric.
pub fn left_multiplication(
    space: &OperatorSpace,
    a: &DMatrix<f64>,
) -> Result<Semicontraction<OperatorSpace>> {
    space
        .validate(a)
        .map_err(|e| parameter(format!("family matrix: {e}")))?;
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| parameter("matrix is singular"))?;
    let a = a.clone();
    Ok(
        Semicontraction::new("left-multiplication", move |b: &DMatrix<f64>| &a * b)
            .with_inverse(move |b: &DMatrix<f64>| &inv * b)
            .isometry(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{check_triangle, sample_points};

    #[test]
    fn examples() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5]));
        assert!((operator_hemi_dist(&i2, &d).unwrap() - 2f64.ln()).abs() < 1e-15);
        let s = OperatorSpace::new(3).unwrap();
        for a in sample_points(&s, 50, 5) {
            assert!(operator_hemi_dist(&a, &a).unwrap().abs() < 1e-12);
            let norm = operator_norm(&a).ln();
            assert!((s.dist(&s.base_point(), &a) - norm).abs() < 1e-9);
        }
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(operator_hemi_dist(&i2, &singular).is_err());
    }

    #[test]
    fn triangle_and_left_multiplication() {
        let s = OperatorSpace::new(3).unwrap();
        assert!(check_triangle(&s, 1000, 7, 1e-9).passed);
        let a = sample_points(&s, 1, 99).remove(0);
        let f = left_multiplication(&s, &a).unwrap();
        assert!(f.check_contraction(&s, 500, 8, 1e-9).passed);
    }

    #[test]
    fn json_round_trip() {
        let s = OperatorSpace::new(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.0]);
        assert_eq!(s.point_from_json(&s.point_to_json(&a)).unwrap(), a);
    }
}
