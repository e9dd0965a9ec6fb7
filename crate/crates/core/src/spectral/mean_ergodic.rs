//! Von Neumann's mean ergodic theorem through the drift of `f(w) = U w + v`.
//!
//! The orbit of 0 is `f^n(0) = sum_{k<n} U^k v`, so the Cesaro averages are
//! `f^n(0) / n`; they converge to the projection `P v` onto the fixed space of
//! `U`, and the drift of `f` is `|P v|`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{parameter, precondition, Result};
use crate::metric::{sample_points, Space};
use crate::report::{Check, CheckList};
use crate::spaces::euclidean::{
    affine_isometry, hilbert_functional, is_orthogonal, Euclidean, Radius,
};
use crate::spectral::principle::{extract_functional, PROBE_COUNT, PROBE_SEED};

/// Eigenvalues of `(U - I)^t (U - I)` below this span the fixed space.
const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct MeanErgodicReport {
    pub projection: Vec<f64>,
    pub average: Vec<f64>,
    /// `|avg_n - P v|` at the horizon.
    pub error: f64,
    /// `max_{k <= n} k |avg_k - P v|`.
    pub scaled_error: f64,
    pub tau_hat: f64,
    /// `|tau_hat - |P v||`.
    pub tau_gap: f64,
    /// `max |h(y) + (y, w)|` on probes for the extracted `h` and `w = P v / |P v|`.
    pub functional_gap: Option<f64>,
    pub checks: CheckList,
}

/// Orthogonal projection onto `ker(U - I)`.
pub fn fixed_space_projection(u: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = u.nrows();
    let a = u - DMatrix::identity(n, n);
    let eig = SymmetricEigen::new(a.transpose() * a);
    let mut p = DVector::zeros(n);
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() < KERNEL_TOL {
            let b = eig.eigenvectors.column(i);
            p += b * b.dot(v);
        }
    }
    p
}

/// Runs the averages to `n`, the drift of `w -> U w + v`, and (when the
/// drift is positive) the functional extracted from the orbit of 0.
///
/// `rate_constant` bounds `k |avg_k - P v|` for the check, `drift_tol` bounds
/// `|tau_hat - |P v||` and `functional_tol` bounds the functional match (it is
/// also the extraction eps).
pub fn mean_ergodic(
    u: &DMatrix<f64>,
    v: &[f64],
    n: usize,
    rate_constant: f64,
    drift_tol: f64,
    functional_tol: f64,
) -> Result<MeanErgodicReport> {
    if !u.is_square() || u.nrows() != v.len() {
        return Err(parameter("U must be square and match the length of v"));
    }
    if n == 0 {
        return Err(parameter("horizon must be at least 1"));
    }
    if !is_orthogonal(u, 1e-12) {
        return Err(precondition("U^t U must equal I within 1e-12"));
    }
    let v = DVector::from_column_slice(v);
    let p = fixed_space_projection(u, &v);
    let mut w = v.clone();
    let mut sum = DVector::zeros(v.len());
    let mut scaled_error = 0.0f64;
    for k in 1..=n {
        sum += &w;
        w = u * w;
        let err = (&sum / k as f64 - &p).norm();
        scaled_error = scaled_error.max(k as f64 * err);
    }
    let average = &sum / n as f64;
    let error = (&average - &p).norm();
    let tau_hat = sum.norm() / n as f64;
    let tau_gap = (tau_hat - p.norm()).abs();

    let mut checks = CheckList::default();
    checks.push(Check::at_most(
        "k |avg_k - Pv| bounded",
        scaled_error,
        rate_constant,
        "geometric sum over the rotation blocks",
    ));
    checks.push(Check::at_most(
        "drift equals |Pv|",
        tau_gap,
        drift_tol,
        "orbit of 0 is the partial sum",
    ));

    let functional_gap = if p.norm() > drift_tol {
        let space = Euclidean::hilbert(v.len());
        let f = affine_isometry(&space, u, v.as_slice())?;
        let ex = extract_functional(&space, &f, &space.base_point(), &[functional_tol], n)?;
        let dir: Vec<f64> = (&p / p.norm()).as_slice().to_vec();
        let lin = hilbert_functional(&space, Radius::Infinite, &dir)?;
        let gap = sample_points(&space, PROBE_COUNT, PROBE_SEED)
            .iter()
            .map(|y| (ex.functional.eval(&space, y) - lin.eval(&space, y)).abs())
            .fold(0.0, f64::max);
        checks.extend(ex.certificate);
        checks.push(Check::at_most(
            "extracted functional matches -(y, Pv/|Pv|)",
            gap,
            functional_tol,
            "linear dual",
        ));
        Some(gap)
    } else {
        None
    };
    Ok(MeanErgodicReport {
        projection: p.as_slice().to_vec(),
        average: average.as_slice().to_vec(),
        error,
        scaled_error,
        tau_hat,
        tau_gap,
        functional_gap,
        checks,
    })
}

/// `rot(theta)` on the first two coordinates, identity on the rest.
pub fn rotation_block(dim: usize, theta: f64) -> DMatrix<f64> {
    let mut u = DMatrix::identity(dim, dim);
    let (s, c) = theta.sin_cos();
    u[(0, 0)] = c;
    u[(0, 1)] = -s;
    u[(1, 0)] = s;
    u[(1, 1)] = c;
    u
}
