//! Finite-dimensional `l^p` spaces. The `p = 2` case carries the Hilbert
//! catalog of metric functionals.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde_json::Value;

use crate::error::{domain, parameter, Error, Result};
use crate::functional::{FunctionalTag, MetricFunctional};
use crate::metric::{sample_points, seeded, uniform_in_ball, Space};
use crate::report::Check;
use crate::spectral::semicontraction::{Boundary, Oracle, Semicontraction};

/// `R^dim` with the `l^p` norm, base point at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    dim: usize,
    p: f64,
}

/// Radius parameter of the Hilbert functional family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Euclidean {
    /// `p` must lie in `[1, inf]`; pass `f64::INFINITY` for the max norm.
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(parameter("dimension must be positive"));
        }
        if !(p >= 1.0) {
            return Err(parameter(format!("p must be in [1, inf], got {p}")));
        }
        Ok(Self { dim, p })
    }

    pub fn hilbert(dim: usize) -> Self {
        Self { dim, p: 2.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        lp_norm(v, self.p)
    }

    fn require_hilbert(&self, what: &str) -> Result<()> {
        if self.is_hilbert() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{what} needs p = 2, space has p = {}",
                self.p
            )))
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(parameter(format!(
                "expected a vector of length {}, got {}",
                self.dim,
                v.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, c| m.max(c.abs()))
    } else if p == 2.0 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    } else if p == 1.0 {
        v.iter().map(|c| c.abs()).sum()
    } else {
        v.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sqrt(|y|^2 - 2(y, r v) + r^2) - r`, evaluated without cancellation for large `r`.
fn hilbert_param_eval(r: f64, v: &[f64], y: &[f64]) -> f64 {
    let yy = dot(y, y);
    let yv = dot(y, v);
    let vv = dot(v, v);
    // |y - r v|^2 + r^2 (1 - |v|^2) = |y|^2 - 2 r (y,v) + r^2
    let shifted: f64 = y
        .iter()
        .zip(v)
        .map(|(a, b)| (a - r * b) * (a - r * b))
        .sum();
    let under = (shifted + r * r * (1.0 - vv)).max(0.0);
    let denom = under.sqrt() + r;
    if denom == 0.0 {
        0.0
    } else {
        (yy - 2.0 * r * yv) / denom
    }
}

impl Space for Euclidean {
    type Point = Vec<f64>;

    fn name(&self) -> String {
        if self.p.is_infinite() {
            format!("euclidean(dim={}, p=inf)", self.dim)
        } else {
            format!("euclidean(dim={}, p={})", self.dim, self.p)
        }
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn dist(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        if self.p == 2.0 {
            x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        } else {
            let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            lp_norm(&diff, self.p)
        }
    }

    fn validate(&self, x: &Vec<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(domain(format!(
                "point has length {}, space has dimension {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(domain("point has a non-finite coordinate"));
        }
        Ok(())
    }

    /// Points are JSON arrays of coordinates.
    fn point_to_json(&self, x: &Vec<f64>) -> Value {
        Value::from(x.clone())
    }

    fn point_from_json(&self, value: &Value) -> Result<Vec<f64>> {
        let pt = json_vector(value)?;
        self.validate(&pt)?;
        Ok(pt)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        uniform_in_ball(rng, self.dim, 3.0)
    }

    fn points_equal(&self, x: &Vec<f64>, y: &Vec<f64>, tol: f64) -> bool {
        x.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol)
    }

    fn eval_closed_form(&self, tag: &FunctionalTag<Vec<f64>>, y: &Vec<f64>) -> Option<f64> {
        if !self.is_hilbert() {
            return None;
        }
        match tag {
            FunctionalTag::HilbertParam { r, v } => Some(hilbert_param_eval(*r, v, y)),
            FunctionalTag::LinearDual { v } => Some(-dot(y, v)),
            _ => None,
        }
    }

    fn check_closed_form(&self, tag: &FunctionalTag<Vec<f64>>) -> Result<()> {
        match tag {
            FunctionalTag::HilbertParam { r, v } => {
                self.require_hilbert("hilbert functional")?;
                self.check_len(v)?;
                if !(r.is_finite() && *r >= 0.0) {
                    return Err(parameter(format!("finite radius must be >= 0, got {r}")));
                }
                check_unit_ball(v)
            }
            FunctionalTag::LinearDual { v } => {
                self.require_hilbert("linear dual functional")?;
                self.check_len(v)?;
                check_unit_ball(v)
            }
            other => Err(Error::Unsupported(format!(
                "{} has no '{}' functional",
                self.name(),
                other.kind_name()
            ))),
        }
    }

    /// Far anchors approximate `y -> -(y, x/|x|)`.
    fn boundary_match(&self, anchor: &Vec<f64>) -> Option<FunctionalTag<Vec<f64>>> {
        if !self.is_hilbert() {
            return None;
        }
        let n = self.norm(anchor);
        (n > 0.0).then(|| FunctionalTag::LinearDual {
            v: anchor.iter().map(|c| c / n).collect(),
        })
    }
}

fn check_unit_ball(v: &[f64]) -> Result<()> {
    let n = lp_norm(v, 2.0);
    if n > 1.0 + 1e-12 {
        return Err(parameter(format!("|v| must be <= 1, got {n}")));
    }
    Ok(())
}

pub(crate) fn json_vector(value: &Value) -> Result<Vec<f64>> {
    value
        .as_array()
        .ok_or_else(|| domain("expected a JSON array"))?
        .iter()
        .map(|c| {
            c.as_f64()
                .ok_or_else(|| domain("expected numeric coordinates"))
        })
        .collect()
}

/// Member of the Hilbert-space catalog.
///
/// Finite `r` gives `h_{r,v}(y) = sqrt(|y|^2 - 2(y, r v) + r^2) - r` (with
/// `r = 0` the norm itself); `r = inf` gives the linear functional `-(y, v)`.
pub fn hilbert_functional(
    space: &Euclidean,
    r: Radius,
    v: &[f64],
) -> Result<MetricFunctional<Euclidean>> {
    let tag = match r {
        Radius::Finite(r) => FunctionalTag::HilbertParam { r, v: v.to_vec() },
        Radius::Infinite => FunctionalTag::LinearDual { v: v.to_vec() },
    };
    MetricFunctional::new(space, tag)
}

/// Limit behaviour of a sequence `t_i v_i` declared by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum DeclaredLimit {
    /// `t_i -> 0`.
    ToZero,
    /// `t_i -> r` in `(0, inf]` and `v_i -> v` weakly.
    To { r: Radius, v: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct LimitClassification {
    pub limit: MetricFunctional<Euclidean>,
    /// Max probe discrepancy `|h_{t_i v_i}(y) - h(y)|` per sequence element.
    pub errors: Vec<f64>,
}

/// Returns the closed-form limit of the internal functionals anchored at
/// `t_i v_i` under the declared limit behaviour, after checking on `probes`
/// that the pointwise discrepancies end below `tol` and do not grow along the
/// tail of the sequence.
pub fn hilbert_limit_classifier(
    space: &Euclidean,
    sequence: &[(f64, Vec<f64>)],
    declared: Option<&DeclaredLimit>,
    probes: &[Vec<f64>],
    tol: f64,
) -> Result<LimitClassification> {
    let declared = declared.ok_or(Error::UndeclaredLimit)?;
    space.require_hilbert("hilbert limit classification")?;
    if sequence.is_empty() || probes.is_empty() {
        return Err(parameter("sequence and probe set must be nonempty"));
    }
    for (t, v) in sequence {
        space.check_len(v)?;
        if !(*t >= 0.0) || (lp_norm(v, 2.0) - 1.0).abs() > 1e-9 {
            return Err(parameter("sequence elements need t >= 0 and |v| = 1"));
        }
    }
    let limit = match declared {
        DeclaredLimit::ToZero => {
            hilbert_functional(space, Radius::Finite(0.0), &vec![0.0; space.dim])?
        }
        DeclaredLimit::To {
            r: Radius::Finite(r),
            ..
        } if *r <= 0.0 => {
            return Err(parameter(
                "a finite declared radius must be positive; use ToZero",
            ))
        }
        DeclaredLimit::To { r, v } => hilbert_functional(space, *r, v)?,
    };
    let limit_vals: Vec<f64> = probes.iter().map(|y| limit.eval(space, y)).collect();
    let errors: Vec<f64> = sequence
        .iter()
        .map(|(t, v)| {
            let anchor: Vec<f64> = v.iter().map(|c| t * c).collect();
            let offset = space.norm(&anchor);
            probes
                .iter()
                .zip(&limit_vals)
                .map(|(y, hy)| (space.dist(y, &anchor) - offset - hy).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let n = errors.len();
    let head = errors[..n.div_ceil(4)].iter().copied().fold(0.0, f64::max);
    let tail = errors[n - n.div_ceil(4)..]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let last = errors[n - 1];
    if last > tol || tail > head.max(tol) {
        return Err(Error::Precondition(format!(
            "sequence does not approach the declared limit on the probes (final error {last:e}, tail {tail:e}, head {head:e})"
        )));
    }
    Ok(LimitClassification { limit, errors })
}

/// Checks `h(t y + (1 - t) z) <= t h(y) + (1 - t) h(z)` on consecutive
/// sample pairs, at the midpoint and at one random `t` per pair.
pub fn check_convexity(
    space: &Euclidean,
    h: &MetricFunctional<Euclidean>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Check {
    let pts = sample_points(space, samples + 1, seed);
    let mut rng = seeded(seed ^ 0xc0ffee);
    let mut worst = 0.0f64;
    for w in pts.windows(2) {
        let (y, z) = (&w[0], &w[1]);
        let (hy, hz) = (h.eval(space, y), h.eval(space, z));
        for t in [0.5, rng.random_range(0.0..1.0)] {
            let m: Vec<f64> = y
                .iter()
                .zip(z)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            let chord = t * hy + (1.0 - t) * hz;
            worst = worst.max((h.eval(space, &m) - chord) / (1.0 + chord.abs()));
        }
    }
    Check::at_most(
        format!("{} functional convexity", h.tag().kind_name()),
        worst,
        tol,
        "normed-space functionals are convex",
    )
}

/// Checks `h(lambda y) = lambda h(y)` for `lambda > 0` on samples, the
/// homogeneity of the directional functionals `-(y, v)`.
pub fn check_homogeneity(
    space: &Euclidean,
    h: &MetricFunctional<Euclidean>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Check {
    let mut rng = seeded(seed ^ 0x4040);
    let worst = sample_points(space, samples, seed)
        .iter()
        .map(|y| {
            let lambda: f64 = rng.random_range(0.01..100.0);
            let scaled: Vec<f64> = y.iter().map(|c| lambda * c).collect();
            let expect = lambda * h.eval(space, y);
            (h.eval(space, &scaled) - expect).abs() / (1.0 + expect.abs())
        })
        .fold(0.0, f64::max);
    Check::at_most(
        format!("{} functional homogeneity", h.tag().kind_name()),
        worst,
        tol,
        "h(lambda y) = lambda h(y)",
    )
}

/// `x -> x + c`.
pub fn translation(space: &Euclidean, c: &[f64]) -> Result<Semicontraction<Euclidean>> {
    space.check_len(c)?;
    let norm = space.norm(c);
    let fwd = c.to_vec();
    let back = c.to_vec();
    let boundary = (norm > 0.0).then(|| Boundary::Direction(c.iter().map(|x| x / norm).collect()));
    Ok(
        Semicontraction::new(format!("translation({c:?})"), move |x: &Vec<f64>| {
            x.iter().zip(&fwd).map(|(a, b)| a + b).collect()
        })
        .with_inverse(move |x: &Vec<f64>| x.iter().zip(&back).map(|(a, b)| a - b).collect())
        .isometry()
        .with_oracle(Oracle {
            tau: Some(norm),
            min_displacement: Some(norm),
            boundary,
            provenance: "translation: d(x, f^n x) = n |c|".into(),
            ..Oracle::default()
        }),
    )
}

/// Rotation of the Euclidean plane about the origin by `theta` radians.
pub fn rotation(space: &Euclidean, theta: f64) -> Result<Semicontraction<Euclidean>> {
    space.require_hilbert("rotation")?;
    if space.dim != 2 {
        return Err(parameter("rotation is defined on the plane"));
    }
    let (s, c) = theta.sin_cos();
    Ok(
        Semicontraction::new(format!("rotation({theta})"), move |x: &Vec<f64>| {
            vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
        })
        .with_inverse(move |x: &Vec<f64>| vec![c * x[0] + s * x[1], -s * x[0] + c * x[1]])
        .isometry()
        .with_oracle(Oracle {
            tau: Some(0.0),
            min_displacement: Some(0.0),
            fixed_point: Some(vec![0.0, 0.0]),
            provenance: "rotation fixes the origin".into(),
            ..Oracle::default()
        }),
    )
}

/// `x -> lambda x` with `|lambda| <= 1`.
pub fn scaling(space: &Euclidean, lambda: f64) -> Result<Semicontraction<Euclidean>> {
    if !(lambda.abs() <= 1.0) {
        return Err(parameter("scaling factor must satisfy |lambda| <= 1"));
    }
    let dim = space.dim;
    Ok(
        Semicontraction::new(format!("scaling({lambda})"), move |x: &Vec<f64>| {
            x.iter().map(|c| lambda * c).collect()
        })
        .with_oracle(Oracle {
            tau: Some(0.0),
            min_displacement: Some(0.0),
            fixed_point: Some(vec![0.0; dim]),
            provenance: "contraction toward the origin".into(),
            ..Oracle::default()
        }),
    )
}

/// Checks `U^T U = I` entrywise within `tol`.
pub fn is_orthogonal(u: &DMatrix<f64>, tol: f64) -> bool {
    u.is_square() && (u.transpose() * u - DMatrix::identity(u.nrows(), u.ncols())).amax() <= tol
}

/// `w -> U w + v` for an orthogonal `U` on the Hilbert space.
pub fn affine_isometry(
    space: &Euclidean,
    u: &DMatrix<f64>,
    v: &[f64],
) -> Result<Semicontraction<Euclidean>> {
    space.require_hilbert("affine isometry")?;
    space.check_len(v)?;
    if u.nrows() != space.dim || !is_orthogonal(u, 1e-12) {
        return Err(Error::Precondition(
            "U must be an orthogonal matrix of the space's dimension".into(),
        ));
    }
    let uf = u.clone();
    let ut = u.transpose();
    let vf = DVector::from_column_slice(v);
    let vb = vf.clone();
    Ok(
        Semicontraction::new("affine-isometry", move |w: &Vec<f64>| {
            (&uf * DVector::from_column_slice(w) + &vf)
                .as_slice()
                .to_vec()
        })
        .with_inverse(move |w: &Vec<f64>| {
            (&ut * (DVector::from_column_slice(w) - &vb))
                .as_slice()
                .to_vec()
        })
        .isometry(),
    )
}
