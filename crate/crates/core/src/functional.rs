//! Metric functionals: normalized distance functions `h_x(.) = d(., x) - d(x0, x)`,
//! their closed-form limits, Busemann functions along rays and 1-Lipschitz
//! extensions.

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{parameter, precondition, Error, Result};
use crate::metric::{sample_points, scaled, Space};
use crate::report::{Check, CheckList};

/// Parametric family a functional belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalTag<P> {
    /// `h_x` for a point `x` of the space.
    Internal { anchor: P },
    /// Hilbert-space functional `sqrt(|y|^2 - 2(y, r v) + r^2) - r` with finite `r >= 0`.
    HilbertParam { r: f64, v: Vec<f64> },
    /// `y -> -(y, v)` with `|v| <= 1`; the `r = infinity` member of the Hilbert family.
    LinearDual { v: Vec<f64> },
    /// Busemann function of the Poincare disk toward the boundary point `zeta`.
    DiskBusemann { zeta: Complex64 },
    /// Internal functional anchored at an orbit point selected at a record time.
    Empirical {
        anchor: P,
        record_time: usize,
        eps: f64,
    },
}

impl<P> FunctionalTag<P> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionalTag::Internal { .. } => "internal",
            FunctionalTag::HilbertParam { .. } => "hilbert-param",
            FunctionalTag::LinearDual { .. } => "linear-dual",
            FunctionalTag::DiskBusemann { .. } => "disk-busemann",
            FunctionalTag::Empirical { .. } => "empirical",
        }
    }

    fn anchor(&self) -> Option<&P> {
        match self {
            FunctionalTag::Internal { anchor } | FunctionalTag::Empirical { anchor, .. } => {
                Some(anchor)
            }
            _ => None,
        }
    }
}

/// Position of a closed-form functional in the finite / exotic / at-infinity
/// trichotomy. Only recorded for closed forms; never inferred from samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalClass {
    /// `h_x` for a point of the space.
    Internal,
    /// Finite infimum but not of the form `h_x`.
    Exotic,
    /// Reached only along unbounded sequences.
    AtInfinity,
    /// A finite-horizon stand-in for a limit.
    PreLimit,
}

/// An evaluable, normalized metric functional: `eval(x0) = 0`.
#[derive(Debug, Clone)]
pub struct MetricFunctional<S: Space> {
    tag: FunctionalTag<S::Point>,
    /// `d(x0, anchor)` for anchored tags.
    offset: f64,
}

impl<S: Space> MetricFunctional<S> {
    /// Builds a functional after checking that `space` can evaluate it.
    pub fn new(space: &S, tag: FunctionalTag<S::Point>) -> Result<Self> {
        let offset = match tag.anchor() {
            Some(anchor) => {
                space.validate(anchor)?;
                space.dist(&space.base_point(), anchor)
            }
            None => {
                space.check_closed_form(&tag)?;
                0.0
            }
        };
        if let FunctionalTag::Empirical { eps, .. } = &tag {
            if !(*eps > 0.0) {
                return Err(parameter("empirical functional needs eps > 0"));
            }
        }
        Ok(Self { tag, offset })
    }

    pub fn tag(&self) -> &FunctionalTag<S::Point> {
        &self.tag
    }

    pub fn eval(&self, space: &S, y: &S::Point) -> f64 {
        match self.tag.anchor() {
            Some(anchor) => space.dist(y, anchor) - self.offset,
            None => space.eval_closed_form(&self.tag, y).unwrap_or_else(|| {
                panic!(
                    "{} cannot evaluate a {} functional",
                    space.name(),
                    self.tag.kind_name()
                )
            }),
        }
    }

    pub fn class(&self) -> FunctionalClass {
        match &self.tag {
            FunctionalTag::Internal { .. } => FunctionalClass::Internal,
            FunctionalTag::Empirical { .. } => FunctionalClass::PreLimit,
            FunctionalTag::HilbertParam { r, v } => {
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if *r == 0.0 || (norm - 1.0).abs() <= 1e-12 {
                    FunctionalClass::Internal
                } else {
                    FunctionalClass::Exotic
                }
            }
            FunctionalTag::LinearDual { .. } | FunctionalTag::DiskBusemann { .. } => {
                FunctionalClass::AtInfinity
            }
        }
    }

    /// Serialized as `{tag, parameters}`.
    pub fn to_json(&self, space: &S) -> Value {
        let parameters = match &self.tag {
            FunctionalTag::Internal { anchor } => json!({ "anchor": space.point_to_json(anchor) }),
            FunctionalTag::HilbertParam { r, v } => json!({ "r": r, "v": v }),
            FunctionalTag::LinearDual { v } => json!({ "v": v }),
            FunctionalTag::DiskBusemann { zeta } => json!({ "zeta": [zeta.re, zeta.im] }),
            FunctionalTag::Empirical {
                anchor,
                record_time,
                eps,
            } => json!({
                "anchor": space.point_to_json(anchor),
                "record_time": record_time,
                "eps": eps,
            }),
        };
        json!({ "tag": self.tag.kind_name(), "parameters": parameters })
    }

    pub fn from_json(space: &S, value: &Value) -> Result<Self> {
        let bad = |what: &str| parameter(format!("functional json: {what}"));
        let tag = value
            .get("tag")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing 'tag'"))?;
        let params = value
            .get("parameters")
            .ok_or_else(|| bad("missing 'parameters'"))?;
        let field = |k: &str| {
            params
                .get(k)
                .ok_or_else(|| bad(&format!("missing parameter '{k}'")))
        };
        let vector = |k: &str| -> Result<Vec<f64>> {
            field(k)?
                .as_array()
                .ok_or_else(|| bad(&format!("'{k}' must be an array")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| bad(&format!("'{k}' must hold numbers")))
                })
                .collect()
        };
        let number = |k: &str| {
            field(k)?
                .as_f64()
                .ok_or_else(|| bad(&format!("'{k}' must be a number")))
        };
        let tag = match tag {
            "internal" => FunctionalTag::Internal {
                anchor: space.point_from_json(field("anchor")?)?,
            },
            "hilbert-param" => FunctionalTag::HilbertParam {
                r: number("r")?,
                v: vector("v")?,
            },
            "linear-dual" => FunctionalTag::LinearDual { v: vector("v")? },
            "disk-busemann" => {
                let z = vector("zeta")?;
                if z.len() != 2 {
                    return Err(bad("'zeta' must be [re, im]"));
                }
                FunctionalTag::DiskBusemann {
                    zeta: Complex64::new(z[0], z[1]),
                }
            }
            "empirical" => FunctionalTag::Empirical {
                anchor: space.point_from_json(field("anchor")?)?,
                record_time: field("record_time")?
                    .as_u64()
                    .ok_or_else(|| bad("'record_time' must be a nonnegative integer"))?
                    as usize,
                eps: number("eps")?,
            },
            other => return Err(bad(&format!("unknown tag '{other}'"))),
        };
        Self::new(space, tag)
    }
}

/// `h_x(.) = d(., x) - d(x0, x)`.
pub fn internal_functional<S: Space>(space: &S, x: &S::Point) -> Result<MetricFunctional<S>> {
    MetricFunctional::new(space, FunctionalTag::Internal { anchor: x.clone() })
}

/// Checks normalization, the two-sided bound `-d(x0,y) <= h(y) <= d(y,x0)`
/// and the directed Lipschitz inequality `h(y) - h(z) <= d(y,z)` on
/// `samples` fixed-seed points (and as many consecutive pairs).
pub fn check_functional<S: Space>(
    space: &S,
    h: &MetricFunctional<S>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> CheckList {
    let x0 = space.base_point();
    let pts = sample_points(space, samples + 1, seed);
    let mut bound_worst = 0.0f64;
    let mut lip_worst = 0.0f64;
    let values: Vec<f64> = pts.iter().map(|y| h.eval(space, y)).collect();
    for (y, hy) in pts.iter().zip(&values) {
        let lo = -space.dist(&x0, y);
        let hi = space.dist(y, &x0);
        bound_worst = bound_worst
            .max((lo - hy) / (1.0 + lo.abs()))
            .max((hy - hi) / (1.0 + hi.abs()));
    }
    for i in 0..samples {
        let (y, z) = (&pts[i], &pts[i + 1]);
        let dyz = space.dist(y, z);
        lip_worst = lip_worst.max((values[i] - values[i + 1] - dyz) / (1.0 + dyz.abs()));
        let dzy = space.dist(z, y);
        lip_worst = lip_worst.max((values[i + 1] - values[i] - dzy) / (1.0 + dzy.abs()));
    }
    let label = h.tag().kind_name();
    let mut checks = CheckList::default();
    checks.push(Check::at_most(
        format!("{label} functional normalization"),
        h.eval(space, &x0).abs(),
        tol,
        "h(x0) = 0",
    ));
    checks.push(Check::at_most(
        format!("{label} functional bounds"),
        bound_worst,
        tol,
        "triangle inequality",
    ));
    checks.push(Check::at_most(
        format!("{label} functional directed 1-Lipschitz"),
        lip_worst,
        tol,
        "triangle inequality",
    ));
    checks
}

/// A parametrized ray `t -> gamma(t)`, `t >= 0`.
#[derive(Clone)]
pub struct Ray<S: Space> {
    sample: Arc<dyn Fn(f64) -> S::Point + Send + Sync>,
    is_geodesic: bool,
}

impl<S: Space> std::fmt::Debug for Ray<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ray")
            .field("is_geodesic", &self.is_geodesic)
            .finish()
    }
}

/// Parameters at which ray geodesicity is verified.
const RAY_CHECK_TIMES: [f64; 9] = [0.0, 0.25, 0.5, 1.0, 2.0, 3.5, 5.0, 10.0, 20.0];

impl<S: Space> Ray<S> {
    /// Wraps `sample` and verifies `|d(gamma(s), gamma(t)) - (t - s)| <= tol`
    /// in both orders on a fixed grid of `0 <= s <= t`.
    pub fn new(
        space: &S,
        sample: impl Fn(f64) -> S::Point + Send + Sync + 'static,
        tol: f64,
    ) -> Self {
        let pts: Vec<S::Point> = RAY_CHECK_TIMES.iter().map(|&t| sample(t)).collect();
        let mut ok = pts.iter().all(|p| space.validate(p).is_ok());
        for (i, s) in RAY_CHECK_TIMES.iter().enumerate() {
            for (j, t) in RAY_CHECK_TIMES.iter().enumerate().skip(i) {
                let fwd = space.dist(&pts[i], &pts[j]);
                let back = space.dist(&pts[j], &pts[i]);
                ok &= (fwd - (t - s)).abs() <= scaled(tol, *t)
                    && (back - (t - s)).abs() <= scaled(tol, *t);
            }
        }
        Self {
            sample: Arc::new(sample),
            is_geodesic: ok,
        }
    }

    pub fn at(&self, t: f64) -> S::Point {
        (self.sample)(t)
    }

    pub fn is_geodesic(&self) -> bool {
        self.is_geodesic
    }
}

/// Finite-horizon Busemann value `d(gamma(T), y) - T`.
pub fn busemann_along_ray<S: Space>(
    space: &S,
    ray: &Ray<S>,
    y: &S::Point,
    horizon: f64,
) -> Result<f64> {
    if !ray.is_geodesic() {
        return Err(precondition("ray is not geodesic"));
    }
    if !(horizon > 0.0) {
        return Err(parameter("horizon must be positive"));
    }
    space.validate(y)?;
    Ok(space.dist(&ray.at(horizon), y) - horizon)
}

/// Busemann values over increasing horizons, with the monotonicity and lower
/// bound checked.
#[derive(Debug, Clone)]
pub struct BusemannProfile {
    pub horizons: Vec<f64>,
    pub values: Vec<f64>,
    /// `-d(y, gamma(0))`.
    pub lower_bound: f64,
}

pub fn busemann_profile<S: Space>(
    space: &S,
    ray: &Ray<S>,
    y: &S::Point,
    horizons: &[f64],
    tol: f64,
) -> Result<BusemannProfile> {
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(parameter("horizons must be strictly increasing"));
    }
    let values = horizons
        .iter()
        .map(|&t| busemann_along_ray(space, ray, y, t))
        .collect::<Result<Vec<_>>>()?;
    let lower_bound = -space.dist(y, &ray.at(0.0));
    for (i, v) in values.iter().enumerate() {
        if i > 0 && *v > values[i - 1] + scaled(tol, *v) {
            return Err(Error::Precondition(format!(
                "Busemann sequence increased at horizon {}: {} > {}",
                horizons[i],
                v,
                values[i - 1]
            )));
        }
        if *v < lower_bound - scaled(tol, lower_bound) {
            return Err(Error::Precondition(format!(
                "Busemann value {v} below bound {lower_bound}"
            )));
        }
    }
    Ok(BusemannProfile {
        horizons: horizons.to_vec(),
        values,
        lower_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// `sup_a (f(a) - d(a, b))`, the smallest extension.
    Sup,
    /// `inf_a (f(a) + d(a, b))`, the largest extension.
    Inf,
}

/// A 1-Lipschitz extension of finitely many values to the whole space.
#[derive(Debug, Clone)]
pub struct LipschitzExtension<S: Space> {
    anchors: Vec<(S::Point, f64)>,
    mode: ExtensionMode,
}

/// Extends `values` from the finite set `A` to the whole space.
///
/// The input must be 1-Lipschitz on `A` in the orientation the mode needs:
/// `f(a) - f(a') <= d(a, a')` for `Sup` and `f(a') - f(a) <= d(a, a')` for
/// `Inf`. On symmetric spaces both reduce to `|f(a) - f(a')| <= d(a, a')`.
pub fn lipschitz_extend<S: Space>(
    space: &S,
    values: Vec<(S::Point, f64)>,
    mode: ExtensionMode,
    tol: f64,
) -> Result<LipschitzExtension<S>> {
    if values.is_empty() {
        return Err(parameter("extension needs at least one anchor"));
    }
    for (a, _) in &values {
        space.validate(a)?;
    }
    for (i, (a, fa)) in values.iter().enumerate() {
        for (j, (b, fb)) in values.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = space.dist(a, b);
            let excess = match mode {
                ExtensionMode::Sup => fa - fb - d,
                ExtensionMode::Inf => fb - fa - d,
            };
            if excess > scaled(tol, d) {
                return Err(precondition(format!(
                    "values are not 1-Lipschitz on the anchor set (pair {i},{j} exceeds by {excess:e})"
                )));
            }
        }
    }
    Ok(LipschitzExtension {
        anchors: values,
        mode,
    })
}

impl<S: Space> LipschitzExtension<S> {
    pub fn eval(&self, space: &S, b: &S::Point) -> f64 {
        let terms = self.anchors.iter().map(|(a, fa)| match self.mode {
            ExtensionMode::Sup => fa - space.dist(a, b),
            ExtensionMode::Inf => fa + space.dist(a, b),
        });
        match self.mode {
            ExtensionMode::Sup => terms.fold(f64::NEG_INFINITY, f64::max),
            ExtensionMode::Inf => terms.fold(f64::INFINITY, f64::min),
        }
    }

    pub fn mode(&self) -> ExtensionMode {
        self.mode
    }
}
