//! The open positive orthant with the Funk and Thompson metrics.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde_json::Value;

use crate::error::{domain, parameter, Result};
use crate::metric::Space;
use crate::spaces::euclidean::json_vector;
use crate::spectral::semicontraction::Semicontraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMetric {
    /// `ln max_i x_i / y_i`; asymmetric and not separating.
    Funk,
    /// Symmetrization of the Funk metric.
    Thompson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveCone {
    dim: usize,
    metric: ConeMetric,
}

impl PositiveCone {
    pub fn new(dim: usize, metric: ConeMetric) -> Result<Self> {
        if dim == 0 {
            return Err(parameter("dimension must be positive"));
        }
        Ok(Self { dim, metric })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> ConeMetric {
        self.metric
    }
}

fn raw_funk(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| a / b)
        .fold(f64::NEG_INFINITY, f64::max)
        .ln()
}

fn check_positive(x: &[f64]) -> Result<()> {
    if x.is_empty() || x.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(domain(
            "cone points need finite, strictly positive coordinates",
        ));
    }
    Ok(())
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    check_positive(x)?;
    check_positive(y)?;
    if x.len() != y.len() {
        return Err(domain("points have different dimensions"));
    }
    Ok(())
}

/// `ln max_i x_i / y_i`.
pub fn funk_dist(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    Ok(raw_funk(x, y))
}

/// Hilbert projective distance `ln(max_i x_i/y_i * max_i y_i/x_i)` of the rays through `x` and `y`.
pub fn hilbert_projective_dist(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let ratios = x.iter().zip(y).map(|(a, b)| a / b);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r), hi.max(r))
    });
    Ok((hi / lo).ln())
}

impl Space for PositiveCone {
    type Point = Vec<f64>;

    fn name(&self) -> String {
        match self.metric {
            ConeMetric::Funk => format!("funk-cone(dim={})", self.dim),
            ConeMetric::Thompson => format!("thompson-cone(dim={})", self.dim),
        }
    }

    fn base_point(&self) -> Vec<f64> {
        vec![1.0; self.dim]
    }

    fn dist(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        match self.metric {
            ConeMetric::Funk => raw_funk(x, y),
            ConeMetric::Thompson => raw_funk(x, y).max(raw_funk(y, x)),
        }
    }

    fn validate(&self, x: &Vec<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(domain(format!(
                "point has length {}, cone has dimension {}",
                x.len(),
                self.dim
            )));
        }
        check_positive(x)
    }

    fn point_to_json(&self, x: &Vec<f64>) -> Value {
        Value::from(x.clone())
    }

    fn point_from_json(&self, value: &Value) -> Result<Vec<f64>> {
        let x = json_vector(value)?;
        self.validate(&x)?;
        Ok(x)
    }

    /// Coordinates `e^u` with `u` uniform in `[-2, 2]`.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim)
            .map(|_| rng.random_range(-2.0f64..2.0).exp())
            .collect()
    }

    fn is_separating(&self) -> bool {
        self.metric == ConeMetric::Thompson
    }

    fn points_equal(&self, x: &Vec<f64>, y: &Vec<f64>, tol: f64) -> bool {
        raw_funk(x, y).max(raw_funk(y, x)) <= tol
    }
}

/// `x -> A x` for an entrywise nonnegative `A` with a positive entry in every
/// row. Such maps are 1-Lipschitz for both cone metrics.
pub fn positive_linear(
    cone: &PositiveCone,
    a: &DMatrix<f64>,
) -> Result<Semicontraction<PositiveCone>> {
    if a.nrows() != cone.dim || a.ncols() != cone.dim {
        return Err(parameter("matrix size does not match the cone"));
    }
    if a.iter().any(|c| !(c.is_finite() && *c >= 0.0))
        || a.row_iter().any(|r| r.iter().all(|c| *c == 0.0))
    {
        return Err(parameter("matrix must be nonnegative with no zero row"));
    }
    let a = a.clone();
    Ok(Semicontraction::new(
        "positive-linear",
        move |x: &Vec<f64>| (&a * DVector::from_column_slice(x)).as_slice().to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{check_triangle, sym_dist};

    #[test]
    fn funk_examples() {
        let funk = PositiveCone::new(2, ConeMetric::Funk).unwrap();
        assert_eq!(
            sym_dist(&funk, &vec![1.0, 1.0], &vec![1.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(funk_dist(&[2.0, 1.0], &[1.0, 1.0]).unwrap(), 2f64.ln());
        assert_eq!(funk_dist(&[1.0, 1.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            sym_dist(&funk, &vec![2.0, 1.0], &vec![1.0, 1.0]).unwrap(),
            2f64.ln()
        );
        assert_eq!(funk_dist(&[1.0, 4.0], &[2.0, 1.0]).unwrap(), 4f64.ln());
        assert_eq!(funk_dist(&[2.0, 1.0], &[1.0, 4.0]).unwrap(), 2f64.ln());
        let thompson = PositiveCone::new(2, ConeMetric::Thompson).unwrap();
        assert_eq!(thompson.dist(&vec![1.0, 4.0], &vec![2.0, 1.0]), 4f64.ln());
        assert!(funk_dist(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn funk_sum_is_hilbert_projective() {
        let funk = PositiveCone::new(4, ConeMetric::Funk).unwrap();
        let pts = crate::metric::sample_points(&funk, 200, 1);
        for w in pts.windows(2) {
            let sum = funk_dist(&w[0], &w[1]).unwrap() + funk_dist(&w[1], &w[0]).unwrap();
            assert!((sum - hilbert_projective_dist(&w[0], &w[1]).unwrap()).abs() < 1e-12);
            // invariant under rescaling either ray
            let scaled: Vec<f64> = w[1].iter().map(|c| 3.5 * c).collect();
            assert!((hilbert_projective_dist(&w[0], &scaled).unwrap() - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_triangle_and_contraction() {
        for metric in [ConeMetric::Funk, ConeMetric::Thompson] {
            let cone = PositiveCone::new(3, metric).unwrap();
            assert!(check_triangle(&cone, 1000, 2, 1e-9).passed);
            let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.0, 0.1, 0.3, 0.6, 0.0, 0.0, 1.0]);
            let f = positive_linear(&cone, &a).unwrap();
            assert!(f.check_contraction(&cone, 1000, 3, 1e-9).passed);
        }
    }
}
