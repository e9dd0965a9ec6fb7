//! Hemi-metric spaces and the elementary utilities defined on top of them.
//!
//! A hemi-metric satisfies the triangle inequality and (usually) separation,
//! but need not be symmetric or nonnegative. Generic code in this crate never
//! symmetrizes silently; use [`sym_dist`] when the symmetric distance is wanted.

use std::fmt::Debug;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::functional::FunctionalTag;
use crate::report::Check;

/// A hemi-metric space with a distinguished base point.
pub trait Space: Clone + Send + Sync + 'static {
    type Point: Clone + Debug + Send + Sync + 'static;

    /// Short identifier used in logs and reports.
    fn name(&self) -> String;

    fn base_point(&self) -> Self::Point;

    /// The hemi-distance `d(x, y)`. Inputs are assumed valid.
    fn dist(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// A bound on the error of `dist(x, y)` due to the finite precision of
    /// the point representation. Exact-input checks widen their tolerance by it.
    fn dist_resolution(&self, _x: &Self::Point, _y: &Self::Point) -> f64 {
        0.0
    }

    /// Checks that `x` is a valid point of this space.
    fn validate(&self, x: &Self::Point) -> Result<()>;

    fn point_to_json(&self, x: &Self::Point) -> Value;

    fn point_from_json(&self, value: &Value) -> Result<Self::Point>;

    /// Draws a point from a bounded region used by property checks and probes.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Self::Point;

    /// Whether `d(x, y) = 0` forces `x = y`. Weak metrics such as the Funk
    /// metric on a full cone vanish on comparable pairs.
    fn is_separating(&self) -> bool {
        true
    }

    /// Point equality up to `tol`, measured by the symmetrized distance.
    fn points_equal(&self, x: &Self::Point, y: &Self::Point, tol: f64) -> bool {
        self.dist(x, y).max(self.dist(y, x)) <= tol
    }

    /// Evaluates a closed-form functional at `y`. Returns `None` for tags the
    /// space has no formula for; internal and empirical tags never reach here.
    fn eval_closed_form(&self, _tag: &FunctionalTag<Self::Point>, _y: &Self::Point) -> Option<f64> {
        None
    }

    /// Validates the parameters of a closed-form tag for this space.
    fn check_closed_form(&self, tag: &FunctionalTag<Self::Point>) -> Result<()> {
        Err(Error::Unsupported(format!(
            "{} has no closed-form functional '{}'",
            self.name(),
            tag.kind_name()
        )))
    }

    /// The boundary element of the closed-form catalog that the internal
    /// functional anchored at `anchor` approximates, if the space has one.
    fn boundary_match(&self, _anchor: &Self::Point) -> Option<FunctionalTag<Self::Point>> {
        None
    }
}

/// Validates both points and returns `max(d(x,y), d(y,x))`.
pub fn sym_dist<S: Space>(space: &S, x: &S::Point, y: &S::Point) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    Ok(space.dist(x, y).max(space.dist(y, x)))
}

/// Gromov product `(x|y) = (d(x,x0) + d(y,x0) - d(x,y)) / 2` at the base point.
///
/// Only meaningful for symmetric distances; the three pairs involved are
/// checked for symmetry within `tol`.
pub fn gromov_product<S: Space>(space: &S, x: &S::Point, y: &S::Point, tol: f64) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    let x0 = space.base_point();
    for (a, b) in [(x, &x0), (y, &x0), (x, y)] {
        let gap = (space.dist(a, b) - space.dist(b, a)).abs();
        if gap > tol {
            return Err(Error::Unsupported(format!(
                "Gromov product needs a symmetric distance; asymmetry {gap:e} on {}",
                space.name()
            )));
        }
    }
    Ok(0.5 * (space.dist(x, &x0) + space.dist(y, &x0) - space.dist(x, y)))
}

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed-seed sample of `n` points.
pub fn sample_points<S: Space>(space: &S, n: usize, seed: u64) -> Vec<S::Point> {
    let mut rng = seeded(seed);
    (0..n).map(|_| space.sample_point(&mut rng)).collect()
}

/// Relative slack used when comparing distances of very different magnitudes.
pub(crate) fn scaled(tol: f64, magnitude: f64) -> f64 {
    tol * (1.0 + magnitude.abs())
}

/// Samples `triples` triples and reports the worst violation of
/// `d(x,y) <= d(x,z) + d(z,y)`.
pub fn check_triangle<S: Space>(space: &S, triples: usize, seed: u64, tol: f64) -> Check {
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..triples {
        let x = space.sample_point(&mut rng);
        let y = space.sample_point(&mut rng);
        let z = space.sample_point(&mut rng);
        let lhs = space.dist(&x, &y);
        let rhs = space.dist(&x, &z) + space.dist(&z, &y);
        worst = worst.max((lhs - rhs) / (1.0 + rhs.abs()));
    }
    Check::at_most(
        format!("triangle inequality on {}", space.name()),
        worst.max(0.0),
        tol,
        "hemi-metric axiom",
    )
}

/// Checks `d(x,x) = 0` and, for separating spaces, `d(x,y) > 0` for distinct
/// sampled pairs.
pub fn check_separation<S: Space>(space: &S, pairs: usize, seed: u64, tol: f64) -> Check {
    let mut rng = seeded(seed);
    let mut ok = true;
    let mut worst_self = 0.0f64;
    for _ in 0..pairs {
        let x = space.sample_point(&mut rng);
        let y = space.sample_point(&mut rng);
        worst_self = worst_self.max(space.dist(&x, &x).abs());
        if space.is_separating() && !space.points_equal(&x, &y, tol) {
            ok &= space.dist(&x, &y).abs() > 0.0;
        }
    }
    Check {
        name: format!("separation on {}", space.name()),
        passed: ok && worst_self <= tol,
        observed: worst_self,
        tolerance: tol,
        oracle: "hemi-metric axiom".into(),
    }
}

/// Random point in a Euclidean ball, used by samplers.
pub(crate) fn uniform_in_ball(rng: &mut dyn RngCore, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|c| c * c).sum();
        if n2 <= 1.0 {
            return v.into_iter().map(|c| c * radius).collect();
        }
    }
}
