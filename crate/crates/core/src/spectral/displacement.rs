//! Minimal displacement search and the elliptic / hyperbolic / parabolic
//! classification, both restricted to a declared compact window.

use num_complex::Complex64;
use rand::RngCore;
use serde::Serialize;

use crate::error::{parameter, Result};
use crate::metric::{sample_points, seeded, uniform_in_ball, Space};
use crate::report::Check;
use crate::spaces::disk::DiskPoint;
use crate::spectral::orbit::{drift, orbit};
use crate::spectral::semicontraction::Semicontraction;

/// Points with depth below this lie in the boundary layer of the window.
pub const BOUNDARY_LAYER: f64 = 0.1;

/// A compact search region.
pub trait Window<P>: Send + Sync {
    fn sample(&self, rng: &mut dyn RngCore) -> P;
    /// A random point near `x` at relative distance up to `scale`, kept inside the window.
    fn perturb(&self, x: &P, scale: f64, rng: &mut dyn RngCore) -> P;
    /// 1 at the center, 0 on the boundary.
    fn depth(&self, x: &P) -> f64;
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallWindow {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallWindow {
    fn clamp(&self, mut x: Vec<f64>) -> Vec<f64> {
        let r = self.offset_norm(&x);
        if r > self.radius {
            for (c, o) in x.iter_mut().zip(&self.center) {
                *c = o + (*c - o) * self.radius / r;
            }
        }
        x
    }

    fn offset_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Window<Vec<f64>> for BallWindow {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let v = uniform_in_ball(rng, self.center.len(), self.radius);
        v.iter().zip(&self.center).map(|(a, b)| a + b).collect()
    }

    fn perturb(&self, x: &Vec<f64>, scale: f64, rng: &mut dyn RngCore) -> Vec<f64> {
        let v = uniform_in_ball(rng, x.len(), scale * self.radius);
        self.clamp(x.iter().zip(&v).map(|(a, b)| a + b).collect())
    }

    fn depth(&self, x: &Vec<f64>) -> f64 {
        1.0 - self.offset_norm(x) / self.radius
    }
}

/// The closed disk `|z| <= radius < 1` in the Poincare disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskWindow {
    pub radius: f64,
}

impl DiskWindow {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(parameter("disk window radius must lie in (0, 1)"));
        }
        Ok(Self { radius })
    }

    fn point(&self, z: Complex64) -> DiskPoint {
        let n = z.norm();
        let z = if n > self.radius {
            z * (self.radius / n)
        } else {
            z
        };
        DiskPoint::new(z).expect("window lies inside the disk")
    }
}

impl Window<DiskPoint> for DiskWindow {
    fn sample(&self, rng: &mut dyn RngCore) -> DiskPoint {
        let v = uniform_in_ball(rng, 2, self.radius);
        self.point(Complex64::new(v[0], v[1]))
    }

    fn perturb(&self, x: &DiskPoint, scale: f64, rng: &mut dyn RngCore) -> DiskPoint {
        let v = uniform_in_ball(rng, 2, scale * self.radius);
        self.point(x.z() + Complex64::new(v[0], v[1]))
    }

    fn depth(&self, x: &DiskPoint) -> f64 {
        1.0 - x.modulus() / self.radius
    }
}

/// Work limits for the displacement search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    /// Uniform samples from the window.
    pub samples: usize,
    /// Rounds of the local pattern search started from the best sample.
    pub local_steps: usize,
    /// Orbit length used for drift estimates in `classify`.
    pub horizon: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            samples: 2000,
            local_steps: 300,
            horizon: 2000,
            seed: 0,
        }
    }
}

/// Result of a displacement search.
#[derive(Debug, Clone)]
pub struct DisplacementSearch<P> {
    /// Smallest `d(x, f x)` found anywhere in the window; an upper bound on `d(f)`.
    pub best: f64,
    pub argmin: P,
    /// Smallest value found at depth at least `BOUNDARY_LAYER`.
    pub interior_best: f64,
    pub interior_argmin: P,
    /// Smallest value per depth decile, from the boundary inward.
    pub depth_profile: Vec<f64>,
    pub evaluations: usize,
}

const PATTERN_TRIES: usize = 8;

#[allow(clippy::too_many_arguments)]
fn local_search<S: Space, W: Window<S::Point>>(
    space: &S,
    f: &Semicontraction<S>,
    window: &W,
    start: (S::Point, f64),
    steps: usize,
    min_depth: f64,
    rng: &mut dyn RngCore,
    record: &mut dyn FnMut(&S::Point, f64),
) -> (S::Point, f64) {
    let (mut x, mut fx) = start;
    let mut scale = 0.25;
    for _ in 0..steps {
        let mut improved = false;
        for _ in 0..PATTERN_TRIES {
            let y = window.perturb(&x, scale, rng);
            if window.depth(&y) < min_depth {
                continue;
            }
            let fy = space.dist(&y, &f.apply(&y));
            record(&y, fy);
            if fy < fx {
                (x, fx) = (y, fy);
                improved = true;
                break;
            }
        }
        if !improved {
            scale *= 0.5;
            if scale < 1e-15 {
                break;
            }
        }
    }
    (x, fx)
}

/// Searches the window for small displacement `d(x, f x)`: uniform sampling,
/// then a pattern search from the best point overall and from the best
/// interior point.
pub fn min_displacement<S: Space, W: Window<S::Point>>(
    space: &S,
    f: &Semicontraction<S>,
    window: &W,
    budget: Budget,
) -> Result<DisplacementSearch<S::Point>> {
    if budget.samples == 0 {
        return Err(parameter("displacement search needs at least one sample"));
    }
    let mut rng = seeded(budget.seed);
    let mut profile = vec![f64::INFINITY; 10];
    let mut evaluations = 0usize;
    let mut record = |x: &S::Point, v: f64| {
        let bin = ((window.depth(x) * 10.0).floor().max(0.0) as usize).min(9);
        profile[bin] = profile[bin].min(v);
        evaluations += 1;
    };
    let mut best: Option<(S::Point, f64)> = None;
    let mut interior: Option<(S::Point, f64)> = None;
    for _ in 0..budget.samples {
        let x = window.sample(&mut rng);
        let v = space.dist(&x, &f.apply(&x));
        record(&x, v);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x.clone(), v));
        }
        if window.depth(&x) >= BOUNDARY_LAYER && interior.as_ref().is_none_or(|b| v < b.1) {
            interior = Some((x, v));
        }
    }
    let best = best.expect("at least one sample");
    let interior = interior.unwrap_or_else(|| best.clone());
    let (argmin, v) = local_search(
        space,
        f,
        window,
        best,
        budget.local_steps,
        0.0,
        &mut rng,
        &mut record,
    );
    let (interior_argmin, iv) = local_search(
        space,
        f,
        window,
        interior,
        budget.local_steps,
        BOUNDARY_LAYER,
        &mut rng,
        &mut record,
    );
    let (best, argmin) = if iv < v {
        (iv, interior_argmin.clone())
    } else {
        (v, argmin)
    };
    Ok(DisplacementSearch {
        best,
        argmin,
        interior_best: iv,
        interior_argmin,
        depth_profile: profile,
        evaluations,
    })
}

/// Checks `a_n / n <= d(x, f x) + (d(x0, x) + d(x, x0)) / n` at `samples`
/// sampled points `x`, where `a_n = d(x0, f^n x0)`. The slack term follows
/// from the triangle inequality and bounds the finite-horizon excess of the
/// drift estimate over the minimal displacement; no search window is needed.
pub fn drift_below_displacement<S: Space>(
    space: &S,
    f: &Semicontraction<S>,
    horizon: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Check> {
    let x0 = space.base_point();
    let trace = orbit(space, f, &x0, horizon)?;
    let rate = trace.dists[horizon] / horizon as f64;
    let mut worst = f64::NEG_INFINITY;
    for x in sample_points(space, samples, seed) {
        let allowance = space.dist(&x, &f.apply(&x))
            + (space.dist(&x0, &x) + space.dist(&x, &x0)) / horizon as f64;
        worst = worst.max((rate - allowance) / (1.0 + allowance.abs()));
    }
    Ok(Check::at_most(
        format!("tau_hat({}) <= d(f) + O(1/n)", f.label()),
        worst.max(0.0),
        tol,
        "tau(f) <= d(f)",
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct Classification<P> {
    pub kind: Kind,
    /// Best displacement found; an upper bound on `d(f)`.
    pub d_f_hat: f64,
    /// Drift estimate `min_k a_k/k` along the orbit of the displacement
    /// minimizer, so `tau_hat <= d_f_hat` holds up to rounding.
    pub tau_hat: f64,
    pub search: DisplacementSearch<P>,
    /// Human-readable log of the decision.
    pub evidence: Vec<String>,
}

/// Classifies `f` inside `window`. Attainment is only judged inside the
/// window, so maps whose behaviour depends on points outside it may come
/// out undetermined.
pub fn classify<S: Space, W: Window<S::Point>>(
    space: &S,
    f: &Semicontraction<S>,
    window: &W,
    tol: f64,
    budget: Budget,
) -> Result<Classification<S::Point>> {
    if !(tol > 0.0) {
        return Err(parameter("classification tolerance must be positive"));
    }
    let search = min_displacement(space, f, window, budget)?;
    let horizon = budget.horizon.max(1);
    let tau_at =
        |x: &S::Point| -> Result<f64> { Ok(drift(&orbit(space, f, x, horizon)?)?.fekete_final()) };
    let tau_hat = tau_at(&search.argmin)?;
    let tau_interior = tau_at(&search.interior_argmin)?;
    let argmin_depth = window.depth(&search.argmin);
    let mut evidence = vec![
        format!(
            "best displacement {:.3e} at window depth {:.3}",
            search.best, argmin_depth
        ),
        format!("best interior displacement {:.3e}", search.interior_best),
        format!("drift from minimizer {tau_hat:.3e}, from interior minimizer {tau_interior:.3e}"),
        format!("{} displacement evaluations", search.evaluations),
    ];
    let kind = if search.interior_best < tol {
        evidence.push("displacement below tolerance at an interior point".into());
        Kind::Elliptic
    } else if tau_interior >= tol && search.interior_best <= tau_interior + tol {
        evidence.push("positive drift realized as displacement at an interior point".into());
        Kind::Hyperbolic
    } else if argmin_depth < BOUNDARY_LAYER && search.best < search.interior_best - tol {
        evidence.push("displacement keeps decreasing into the boundary layer".into());
        Kind::Parabolic
    } else {
        evidence.push("no rule applied".into());
        Kind::Undetermined
    };
    Ok(Classification {
        kind,
        d_f_hat: search.best,
        tau_hat,
        search,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::disk::{Mobius, PoincareDisk};
    use crate::spaces::euclidean::{rotation, translation, Euclidean};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn translation_displacement_is_constant() {
        let s = Euclidean::hilbert(3);
        let f = translation(&s, &[1.0, -2.0, 2.0]).unwrap();
        let w = BallWindow {
            center: vec![0.0; 3],
            radius: 5.0,
        };
        let r = min_displacement(
            &s,
            &f,
            &w,
            Budget {
                samples: 50,
                local_steps: 10,
                ..Budget::default()
            },
        )
        .unwrap();
        assert!((r.best - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_elliptic() {
        let s = Euclidean::hilbert(2);
        let f = rotation(&s, 1.0).unwrap();
        let w = BallWindow {
            center: vec![0.3, -0.2],
            radius: 2.0,
        };
        let cl = classify(&s, &f, &w, 1e-6, Budget::default()).unwrap();
        assert_eq!(cl.kind, Kind::Elliptic, "{:?}", cl.evidence);
        let disk_rot = Mobius::rotation(0.8).into_map("rot");
        let cl = classify(
            &PoincareDisk,
            &disk_rot,
            &DiskWindow::new(0.9).unwrap(),
            1e-6,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(cl.kind, Kind::Elliptic, "{:?}", cl.evidence);
    }

    #[test]
    fn hyperbolic_mobius() {
        let m =
            Mobius::from_matrix([[c(1.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]]).unwrap();
        let f = m.into_map("hyp");
        let cl = classify(
            &PoincareDisk,
            &f,
            &DiskWindow::new(0.9).unwrap(),
            1e-6,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(cl.kind, Kind::Hyperbolic, "{:?}", cl.evidence);
        assert!((cl.tau_hat - 3f64.ln()).abs() < 1e-6);
        assert!(cl.tau_hat <= cl.d_f_hat + 1e-9);
    }

    #[test]
    fn parabolic_mobius() {
        let t = 0.5;
        let m = Mobius::from_matrix([[c(1.0, t), c(0.0, -t)], [c(0.0, t), c(1.0, -t)]]).unwrap();
        let f = m.into_map("par");
        let cl = classify(
            &PoincareDisk,
            &f,
            &DiskWindow::new(0.99).unwrap(),
            1e-6,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(cl.kind, Kind::Parabolic, "{:?}", cl.evidence);
        // displacement along the radius toward the fixed point decreases
        let along: Vec<f64> = [0.0, 0.5, 0.9, 0.99, 0.999]
            .iter()
            .map(|r| {
                let p = DiskPoint::new(c(*r, 0.0)).unwrap();
                PoincareDisk.dist(&p, &f.apply(&p))
            })
            .collect();
        assert!(
            along.windows(2).all(|w| w[1] < w[0]) && along[4] > 0.0,
            "{along:?}"
        );
    }

    #[test]
    fn empty_sampler_is_rejected() {
        let s = Euclidean::hilbert(1);
        let f = translation(&s, &[1.0]).unwrap();
        let w = BallWindow {
            center: vec![0.0],
            radius: 1.0,
        };
        assert!(min_displacement(
            &s,
            &f,
            &w,
            Budget {
                samples: 0,
                ..Budget::default()
            }
        )
        .is_err());
    }

    #[test]
    fn drift_bound_holds_and_detects_expansion() {
        let hyp = Mobius::new(c(1.0, 0.0), c(0.5, 0.0))
            .unwrap()
            .into_map("hyp");
        assert!(
            drift_below_displacement(&PoincareDisk, &hyp, 200, 500, 1, 1e-9)
                .unwrap()
                .passed
        );
        let s = Euclidean::hilbert(1);
        let double =
            Semicontraction::<Euclidean>::new("double", |x: &Vec<f64>| vec![2.0 * x[0] + 1.0]);
        assert!(
            !drift_below_displacement(&s, &double, 40, 100, 1, 1e-9)
                .unwrap()
                .passed
        );
    }
}
