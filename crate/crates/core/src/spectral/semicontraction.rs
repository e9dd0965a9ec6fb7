use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::metric::{seeded, Space};
use crate::report::Check;

pub type MapFn<P> = Arc<dyn Fn(&P) -> P + Send + Sync>;

/// Where an orbit escapes to, when known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// A point of the unit circle.
    Disk(Complex64),
    /// A unit direction of a normed space.
    Direction(Vec<f64>),
}

/// Exact invariants of a map, used as test oracles.
#[derive(Debug, Clone)]
pub struct Oracle<P> {
    pub tau: Option<f64>,
    pub min_displacement: Option<f64>,
    pub fixed_point: Option<P>,
    pub boundary: Option<Boundary>,
    /// Where the exact values come from.
    pub provenance: String,
}

impl<P> Default for Oracle<P> {
    fn default() -> Self {
        Self {
            tau: None,
            min_displacement: None,
            fixed_point: None,
            boundary: None,
            provenance: String::new(),
        }
    }
}

/// A self-map that does not increase the space's hemi-distance.
pub struct Semicontraction<S: Space> {
    label: String,
    forward: MapFn<S::Point>,
    inverse: Option<MapFn<S::Point>>,
    isometry: bool,
    oracle: Oracle<S::Point>,
}

impl<S: Space> Clone for Semicontraction<S> {
    fn clone(&self) -> Self {
        Self {
            label: self.label.clone(),
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
            isometry: self.isometry,
            oracle: self.oracle.clone(),
        }
    }
}

impl<S: Space> fmt::Debug for Semicontraction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Semicontraction")
            .field("label", &self.label)
            .field("invertible", &self.inverse.is_some())
            .field("isometry", &self.isometry)
            .field("oracle", &self.oracle)
            .finish()
    }
}

impl<S: Space> Semicontraction<S> {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&S::Point) -> S::Point + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            forward: Arc::new(f),
            inverse: None,
            isometry: false,
            oracle: Oracle::default(),
        }
    }

    pub fn with_inverse(
        mut self,
        g: impl Fn(&S::Point) -> S::Point + Send + Sync + 'static,
    ) -> Self {
        self.inverse = Some(Arc::new(g));
        self
    }

    /// Marks the map as a distance-preserving bijection.
    pub fn isometry(mut self) -> Self {
        self.isometry = true;
        self
    }

    pub fn with_oracle(mut self, oracle: Oracle<S::Point>) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, x: &S::Point) -> S::Point {
        (self.forward)(x)
    }

    pub fn apply_inverse(&self, x: &S::Point) -> Option<S::Point> {
        self.inverse.as_ref().map(|g| g(x))
    }

    pub fn is_isometry(&self) -> bool {
        self.isometry
    }

    pub fn oracle(&self) -> &Oracle<S::Point> {
        &self.oracle
    }

    /// The inverse as a map of its own, when available. Oracle values do not
    /// carry over except `tau`, which agrees for isometries.
    pub fn inverse(&self) -> Option<Self> {
        let g = self.inverse.clone()?;
        Some(Self {
            label: format!("inverse({})", self.label),
            forward: g,
            inverse: Some(self.forward.clone()),
            isometry: self.isometry,
            oracle: Oracle {
                tau: if self.isometry { self.oracle.tau } else { None },
                provenance: self.oracle.provenance.clone(),
                ..Oracle::default()
            },
        })
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let (f, g) = (self.forward.clone(), other.forward.clone());
        let inverse = match (&self.inverse, &other.inverse) {
            (Some(fi), Some(gi)) => {
                let (fi, gi) = (fi.clone(), gi.clone());
                Some(Arc::new(move |x: &S::Point| gi(&fi(x))) as MapFn<S::Point>)
            }
            _ => None,
        };
        Self {
            label: format!("{}∘{}", self.label, other.label),
            forward: Arc::new(move |x| f(&g(x))),
            inverse,
            isometry: self.isometry && other.isometry,
            oracle: Oracle::default(),
        }
    }

    /// Samples `pairs` pairs and reports the worst relative excess of
    /// `d(f x, f y)` over `d(x, y)`.
    pub fn check_contraction(&self, space: &S, pairs: usize, seed: u64, tol: f64) -> Check {
        let mut rng = seeded(seed);
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let x = space.sample_point(&mut rng);
            let y = space.sample_point(&mut rng);
            let before = space.dist(&x, &y);
            let after = space.dist(&self.apply(&x), &self.apply(&y));
            worst = worst.max((after - before) / (1.0 + before.abs()));
        }
        Check::at_most(
            format!("{} is 1-Lipschitz on {}", self.label, space.name()),
            worst,
            tol,
            "semicontraction axiom",
        )
    }
}
