//! Experiment configuration: a single TOML file with a versioned schema.
//!
//! Unknown keys are rejected everywhere. Parse errors carry the dotted path
//! of the offending key.

use std::path::{Path, PathBuf};

use metric_spectral::ergodic::ChoiceProcess;
use metric_spectral::spaces::Curve;
use metric_spectral::Tolerances;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Drift,
    Functional,
    WolffDenjoy,
    MeanErgodic,
    Lyapunov,
    Thurston,
    CurveGrowth,
    Invariants,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::Drift,
        Self::Functional,
        Self::WolffDenjoy,
        Self::MeanErgodic,
        Self::Lyapunov,
        Self::Thurston,
        Self::CurveGrowth,
        Self::Invariants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Drift => "drift",
            Self::Functional => "functional",
            Self::WolffDenjoy => "wolff-denjoy",
            Self::MeanErgodic => "mean-ergodic",
            Self::Lyapunov => "lyapunov",
            Self::Thurston => "thurston",
            Self::CurveGrowth => "curve-growth",
            Self::Invariants => "invariants",
        }
    }
}

/// A complex number given either as a real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(self) -> num_complex::Complex64 {
        match self {
            Self::Real(re) => num_complex::Complex64::new(re, 0.0),
            Self::Pair([re, im]) => num_complex::Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeMetricSpec {
    Thompson,
    Funk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean {
        dim: usize,
        #[serde(default = "two")]
        p: f64,
    },
    PoincareDisk,
    Cone {
        dim: usize,
        metric: ConeMetricSpec,
    },
    Operator {
        dim: usize,
    },
    Torus,
}

fn two() -> f64 {
    2.0
}

impl SpaceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Euclidean { .. } => "euclidean",
            Self::PoincareDisk => "poincare-disk",
            Self::Cone { .. } => "cone",
            Self::Operator { .. } => "operator",
            Self::Torus => "torus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x -> x + offset` (euclidean).
    Translation { offset: Vec<f64> },
    /// Planar rotation by `angle` radians (euclidean, dim 2).
    Rotation { angle: f64 },
    /// `x -> factor x` with `0 <= factor <= 1` (euclidean).
    Scaling { factor: f64 },
    /// `x -> U x + offset` with `U` orthogonal (euclidean, p = 2).
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// A disk automorphism from a matrix `[[a, b], [c, d]]` or from `alpha`, `beta`.
    Mobius {
        #[serde(skip_serializing_if = "Option::is_none")]
        matrix: Option<[[ComplexSpec; 2]; 2]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha: Option<ComplexSpec>,
        #[serde(skip_serializing_if = "Option::is_none")]
        beta: Option<ComplexSpec>,
    },
    /// `z -> e^{i angle} z` (disk).
    DiskRotation { angle: f64 },
    /// A finite Blaschke product; `boundary` declares its Denjoy-Wolff point.
    Blaschke {
        #[serde(default = "unit")]
        rotation: ComplexSpec,
        zeros: Vec<ComplexSpec>,
        #[serde(skip_serializing_if = "Option::is_none")]
        boundary: Option<ComplexSpec>,
    },
    /// `x -> A x` with `A` nonnegative (cone).
    PositiveLinear { matrix: Vec<Vec<f64>> },
    /// `X -> A X` with `A` invertible (operator).
    LeftMultiplication { matrix: Vec<Vec<f64>> },
    /// An integer matrix of determinant +-1 acting on moduli (torus).
    MappingClass { matrix: [[i64; 2]; 2] },
}

fn unit() -> ComplexSpec {
    ComplexSpec::Real(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSpec {
    pub process: ChoiceProcess,
    /// Trajectory seeds; defaults to the top-level seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Matrices for `lyapunov`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<f64>>>>,
    /// Mapping classes for `curve-growth`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<[[i64; 2]; 2]>>,
    /// Starting modulus for `curve-growth`, `[re, im]`; defaults to `i`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<[f64; 2]>,
    /// When set, record times at this eps are flagged in the trajectory tables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThurstonSpec {
    /// Curves `(p, q)` with `|p|, |q| <= bound` are enumerated.
    #[serde(default = "fifty")]
    pub bound: u32,
    /// Random modulus pairs to compare.
    #[serde(default = "hundred")]
    pub pairs: usize,
}

impl Default for ThurstonSpec {
    fn default() -> Self {
        Self {
            bound: 50,
            pairs: 100,
        }
    }
}

fn fifty() -> u32 {
    50
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(default = "metric_spectral::ergodic::default_basis")]
    pub basis: Vec<Curve>,
    #[serde(default = "tenth")]
    pub eps: f64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        Self {
            basis: metric_spectral::ergodic::default_basis(),
            eps: 0.1,
        }
    }
}

fn tenth() -> f64 {
    0.1
}

/// Expected values turned into acceptance checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSpec {
    /// Drift of every map (`drift`, `functional`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Top exponent (`lyapunov`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<f64>,
    /// Bound on `k |avg_k - P v|` (`mean-ergodic`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_constant: Option<f64>,
    /// Dominant basis curve (`curve-growth`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominant_curve: Option<Curve>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            formats: all_formats(),
        }
    }
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub maps: Vec<MapSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<DriverSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Sample count for property checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thurston: Option<ThurstonSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurveSpec>,
    #[serde(default)]
    pub expect: ExpectSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_horizon(kind: ExperimentKind) -> usize {
    match kind {
        ExperimentKind::Drift | ExperimentKind::Functional | ExperimentKind::WolffDenjoy => 1000,
        ExperimentKind::MeanErgodic => 100_000,
        ExperimentKind::Lyapunov => 100_000,
        ExperimentKind::CurveGrowth => 10_000,
        ExperimentKind::Thurston => 1,
        ExperimentKind::Invariants => 200,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| CliError::Usage(format!("config is not valid TOML: {e}")))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            if path == "." {
                CliError::Usage(format!("config: {msg}"))
            } else {
                CliError::Usage(format!("config key `{path}`: {msg}"))
            }
        })?;
        cfg.check()?;
        Ok(cfg.with_defaults())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fills every defaulted field so the echoed config replays exactly.
    fn with_defaults(mut self) -> Self {
        use ExperimentKind::*;
        let kind = self.experiment;
        if kind != Thurston {
            self.horizon.get_or_insert(default_horizon(kind));
        }
        if matches!(kind, Drift | Functional | WolffDenjoy) {
            self.eps_schedule
                .get_or_insert_with(metric_spectral::default_eps_schedule);
        }
        if matches!(kind, Drift | Functional | Invariants) {
            self.samples.get_or_insert(1000);
        }
        match kind {
            ExperimentKind::Thurston => {
                self.thurston.get_or_insert_with(ThurstonSpec::default);
            }
            ExperimentKind::CurveGrowth => {
                self.curves.get_or_insert_with(CurveSpec::default);
            }
            _ => {}
        }
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(default_horizon(self.experiment))
    }

    pub fn eps_schedule(&self) -> Vec<f64> {
        self.eps_schedule
            .clone()
            .unwrap_or_else(metric_spectral::default_eps_schedule)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(1000)
    }

    /// Structural checks that do not need the library: schema version,
    /// required and forbidden sections per experiment, value ranges.
    fn check(&self) -> Result<(), CliError> {
        let usage =
            |key: &str, msg: &str| Err(CliError::Usage(format!("config key `{key}`: {msg}")));
        if self.schema != SCHEMA_VERSION {
            return usage(
                "schema",
                &format!(
                    "unsupported schema version {} (expected {SCHEMA_VERSION})",
                    self.schema
                ),
            );
        }
        if self.horizon == Some(0) {
            return usage("horizon", "must be at least 1");
        }
        if self.samples == Some(0) {
            return usage("samples", "must be at least 1");
        }
        if let Some(eps) = &self.eps_schedule {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return usage(
                    "eps_schedule",
                    "must be a nonempty list of positive numbers",
                );
            }
            if eps.windows(2).any(|w| w[1] >= w[0]) {
                return usage("eps_schedule", "must be strictly decreasing");
            }
        }
        for (key, value) in [
            ("tolerances.algebraic", self.tolerances.algebraic),
            ("tolerances.geometric", self.tolerances.geometric),
            ("tolerances.ergodic", self.tolerances.ergodic),
            ("tolerances.point_eq", self.tolerances.point_eq),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return usage(key, "must be a finite nonnegative number");
            }
        }
        if self.output.formats.is_empty() {
            return usage("output.formats", "must list at least one of csv, json");
        }

        use ExperimentKind::*;
        let kind = self.experiment;
        if kind == Thurston && self.horizon.is_some() {
            return usage("horizon", "not used by experiment `thurston`");
        }
        if self.eps_schedule.is_some() && !matches!(kind, Drift | Functional | WolffDenjoy) {
            return usage(
                "eps_schedule",
                &format!("not used by experiment `{}`", kind.name()),
            );
        }
        if self.samples.is_some() && !matches!(kind, Drift | Functional | Invariants) {
            return usage(
                "samples",
                &format!("not used by experiment `{}`", kind.name()),
            );
        }
        let needs_space = matches!(
            kind,
            Drift | Functional | WolffDenjoy | MeanErgodic | Invariants
        );
        let needs_maps = matches!(kind, Drift | Functional | WolffDenjoy | MeanErgodic);
        let needs_driver = matches!(kind, Lyapunov | CurveGrowth);
        match (&self.space, needs_space) {
            (None, true) => {
                return usage(
                    "space",
                    &format!("required by experiment `{}`", kind.name()),
                )
            }
            (Some(_), false) => {
                return usage(
                    "space",
                    &format!("not used by experiment `{}`", kind.name()),
                )
            }
            _ => {}
        }
        if needs_maps && self.maps.is_empty() {
            return usage(
                "maps",
                &format!("experiment `{}` needs at least one map", kind.name()),
            );
        }
        if !needs_space && !self.maps.is_empty() {
            return usage("maps", &format!("not used by experiment `{}`", kind.name()));
        }
        match (&self.driver, needs_driver) {
            (None, true) => {
                return usage(
                    "driver",
                    &format!("required by experiment `{}`", kind.name()),
                )
            }
            (Some(_), false) => {
                return usage(
                    "driver",
                    &format!("not used by experiment `{}`", kind.name()),
                )
            }
            _ => {}
        }
        if self.thurston.is_some() && kind != Thurston {
            return usage(
                "thurston",
                &format!("not used by experiment `{}`", kind.name()),
            );
        }
        if self.curves.is_some() && kind != CurveGrowth {
            return usage(
                "curves",
                &format!("not used by experiment `{}`", kind.name()),
            );
        }
        if let Some(space) = &self.space {
            if kind == WolffDenjoy && *space != SpaceSpec::PoincareDisk {
                return usage("space.kind", "wolff-denjoy runs on the poincare-disk");
            }
            if kind == MeanErgodic && !matches!(space, SpaceSpec::Euclidean { p, .. } if *p == 2.0)
            {
                return usage("space", "mean-ergodic runs on a euclidean space with p = 2");
            }
        }
        if kind == MeanErgodic {
            if self.maps.len() != 1 || !matches!(self.maps[0], MapSpec::Affine { .. }) {
                return usage("maps", "mean-ergodic takes exactly one affine map");
            }
            if self.expect.rate_constant.is_none() {
                return usage(
                    "expect.rate_constant",
                    "required by experiment `mean-ergodic`",
                );
            }
        }
        let expect_allowed = [
            (
                "expect.tau",
                self.expect.tau.is_some(),
                matches!(kind, Drift | Functional),
            ),
            (
                "expect.lyapunov",
                self.expect.lyapunov.is_some(),
                kind == Lyapunov,
            ),
            (
                "expect.rate_constant",
                self.expect.rate_constant.is_some(),
                kind == MeanErgodic,
            ),
            (
                "expect.dominant_curve",
                self.expect.dominant_curve.is_some(),
                kind == CurveGrowth,
            ),
        ];
        for (key, present, allowed) in expect_allowed {
            if present && !allowed {
                return usage(key, &format!("not used by experiment `{}`", kind.name()));
            }
        }
        if let Some(driver) = &self.driver {
            match kind {
                Lyapunov if driver.matrices.is_none() => {
                    return usage("driver.matrices", "required by `lyapunov`")
                }
                Lyapunov if driver.classes.is_some() || driver.modulus.is_some() => {
                    return usage(
                        "driver.classes",
                        "`lyapunov` drives matrices, not mapping classes",
                    )
                }
                CurveGrowth if driver.classes.is_none() => {
                    return usage("driver.classes", "required by `curve-growth`")
                }
                CurveGrowth if driver.matrices.is_some() => {
                    return usage(
                        "driver.matrices",
                        "`curve-growth` drives mapping classes, not matrices",
                    )
                }
                _ => {}
            }
            if let Some(seeds) = &driver.seeds {
                if seeds.is_empty() {
                    return usage("driver.seeds", "must not be empty");
                }
            }
            if let Some(eps) = driver.record_eps {
                if !(eps > 0.0 && eps.is_finite()) {
                    return usage("driver.record_eps", "must be positive");
                }
            }
        }
        if let Some(t) = &self.thurston {
            if t.bound == 0 || t.pairs == 0 {
                return usage("thurston", "bound and pairs must be at least 1");
            }
        }
        if let Some(c) = &self.curves {
            if c.basis.is_empty() {
                return usage("curves.basis", "must not be empty");
            }
            if !(c.eps > 0.0 && c.eps.is_finite()) {
                return usage("curves.eps", "must be positive");
            }
        }
        Ok(())
    }
}
