use rand::Rng;
use serde::Serialize;

use crate::error::{parameter, Error, Result};
use crate::metric::{seeded, Space};
use crate::report::{Check, CheckList};
use crate::spectral::semicontraction::Semicontraction;

/// Pairs checked exhaustively below this horizon, sampled above it.
const EXHAUSTIVE_PAIRS: usize = 400;
const SAMPLED_PAIRS: usize = 50_000;

/// The orbit `f^k(x0)`, `k = 0..=n`, with `a_k = d(x0, f^k x0)` and
/// `step_dists[k] = d(f^k x0, f^{k+1} x0)`.
#[derive(Debug, Clone)]
pub struct OrbitTrace<P> {
    pub x0: P,
    pub points: Vec<P>,
    pub dists: Vec<f64>,
    pub step_dists: Vec<f64>,
    /// Representation error bounds for `dists` and `step_dists`.
    pub resolution: Vec<f64>,
    pub step_resolution: Vec<f64>,
    /// Subadditivity of `a_k` and monotonicity of the step distances.
    pub checks: CheckList,
}

impl<P: Clone> OrbitTrace<P> {
    pub fn horizon(&self) -> usize {
        self.dists.len() - 1
    }

    /// The trace cut at `n`, with its checks.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.horizon());
        let mut out = Self {
            x0: self.x0.clone(),
            points: self.points[..=n].to_vec(),
            dists: self.dists[..=n].to_vec(),
            step_dists: self.step_dists[..n].to_vec(),
            resolution: self.resolution[..=n].to_vec(),
            step_resolution: self.step_resolution[..n].to_vec(),
            checks: CheckList::default(),
        };
        out.checks = trace_checks(&out, 1e-9);
        out
    }
}

/// Iterates `f` from `x0` for `n` steps.
pub fn orbit<S: Space>(
    space: &S,
    f: &Semicontraction<S>,
    x0: &S::Point,
    n: usize,
) -> Result<OrbitTrace<S::Point>> {
    if n == 0 {
        return Err(parameter("orbit horizon must be at least 1"));
    }
    space.validate(x0)?;
    let mut points = Vec::with_capacity(n + 1);
    let mut dists = Vec::with_capacity(n + 1);
    let mut step_dists = Vec::with_capacity(n);
    let mut resolution = Vec::with_capacity(n + 1);
    let mut step_resolution = Vec::with_capacity(n);
    points.push(x0.clone());
    dists.push(space.dist(x0, x0));
    resolution.push(space.dist_resolution(x0, x0));
    for k in 1..=n {
        let next = f.apply(&points[k - 1]);
        space
            .validate(&next)
            .map_err(|e| Error::InvalidOrbitPoint {
                step: k,
                reason: e.to_string(),
            })?;
        step_dists.push(space.dist(&points[k - 1], &next));
        step_resolution.push(space.dist_resolution(&points[k - 1], &next));
        dists.push(space.dist(x0, &next));
        resolution.push(space.dist_resolution(x0, &next));
        points.push(next);
    }
    let mut trace = OrbitTrace {
        x0: x0.clone(),
        points,
        dists,
        step_dists,
        resolution,
        step_resolution,
        checks: CheckList::default(),
    };
    trace.checks = trace_checks(&trace, 1e-9);
    Ok(trace)
}

/// Worst relative violation of `a_{m+n} <= a_m + a_n` over index pairs.
pub fn subadditivity_violation(a: &[f64]) -> f64 {
    subadditivity_violation_within(a, &vec![0.0; a.len()])
}

/// As [`subadditivity_violation`], with each `a_k` known only up to `err_k`.
pub fn subadditivity_violation_within(a: &[f64], err: &[f64]) -> f64 {
    let n = a.len() - 1;
    let excess = |i: usize, j: usize| {
        (a[i + j] - a[i] - a[j] - err[i + j] - err[i] - err[j]) / (1.0 + a[i].abs() + a[j].abs())
    };
    let mut worst = 0.0f64;
    if n <= EXHAUSTIVE_PAIRS {
        for i in 1..=n {
            for j in 1..=(n - i) {
                worst = worst.max(excess(i, j));
            }
        }
    } else {
        let mut rng = seeded(n as u64);
        for _ in 0..SAMPLED_PAIRS {
            let i = rng.random_range(1..n);
            let j = rng.random_range(1..=(n - i));
            worst = worst.max(excess(i, j));
        }
    }
    worst
}

fn trace_checks<P>(trace: &OrbitTrace<P>, tol: f64) -> CheckList {
    let (steps, res) = (&trace.step_dists, &trace.step_resolution);
    let mut checks = CheckList::default();
    checks.push(Check::at_most(
        "orbit distances are subadditive",
        subadditivity_violation_within(&trace.dists, &trace.resolution),
        tol,
        "a_{m+n} <= a_m + a_n",
    ));
    let growth = (1..steps.len())
        .map(|k| (steps[k] - steps[k - 1] - res[k] - res[k - 1]) / (1.0 + steps[k - 1].abs()))
        .fold(0.0f64, f64::max);
    checks.push(Check::at_most(
        "step distances are non-increasing",
        growth,
        tol,
        "1-Lipschitz map",
    ));
    checks
}

/// `a_n / n` at the horizon with its running infimum.
#[derive(Debug, Clone, Serialize)]
pub struct DriftEstimate {
    pub tau_hat: f64,
    /// `a_k / k` for `k = 1..=n`.
    pub sequence: Vec<f64>,
    /// Running infimum of `a_k / k`; an upper bound on the drift.
    pub fekete_inf: Vec<f64>,
    pub horizon: usize,
}

impl DriftEstimate {
    /// `max_{n/2 <= k <= n} |a_k/k - a_n/n|`, a proxy for the `O(1/n)` error of `tau_hat`.
    pub fn convergence_gap(&self) -> f64 {
        let n = self.horizon;
        let half = (n / 2).max(1);
        self.sequence[half - 1..]
            .iter()
            .map(|r| (r - self.tau_hat).abs())
            .fold(0.0, f64::max)
    }

    pub fn oracle_gap(&self, tau: f64) -> f64 {
        (self.tau_hat - tau).abs()
    }

    pub fn fekete_final(&self) -> f64 {
        *self.fekete_inf.last().expect("nonempty")
    }
}

pub fn drift<P>(trace: &OrbitTrace<P>) -> Result<DriftEstimate> {
    drift_from_dists(&trace.dists)
}

pub(crate) fn drift_from_dists(dists: &[f64]) -> Result<DriftEstimate> {
    if dists.len() < 2 {
        return Err(parameter("drift needs a trace of length at least 2"));
    }
    let sequence: Vec<f64> = dists
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a / k as f64)
        .collect();
    let mut inf = f64::INFINITY;
    let fekete_inf = sequence
        .iter()
        .map(|r| {
            inf = inf.min(*r);
            inf
        })
        .collect();
    Ok(DriftEstimate {
        tau_hat: *sequence.last().unwrap(),
        sequence,
        fekete_inf,
        horizon: dists.len() - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::euclidean::{rotation, scaling, translation, Euclidean};

    #[test]
    fn translation_orbit() {
        let s = Euclidean::hilbert(1);
        let f = translation(&s, &[1.0]).unwrap();
        let t = orbit(&s, &f, &vec![0.0], 5).unwrap();
        assert_eq!(t.dists, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(t.checks.all_passed());
        let d = drift(&t).unwrap();
        assert_eq!(d.tau_hat, 1.0);
        assert!(d.fekete_inf.iter().all(|x| *x == 1.0));
    }

    #[test]
    fn rotation_chords() {
        let s = Euclidean::hilbert(2);
        let f = rotation(&s, 1.0).unwrap();
        let t = orbit(&s, &f, &vec![1.0, 0.0], 200).unwrap();
        for (k, a) in t.dists.iter().enumerate() {
            assert!((a - (2.0 * (k as f64 / 2.0).sin()).abs()).abs() < 1e-12);
        }
        assert!(t.checks.all_passed());
        assert!(drift(&t).unwrap().tau_hat < 2.0 / 200.0);
    }

    #[test]
    fn halving_orbit() {
        let s = Euclidean::hilbert(1);
        let f = scaling(&s, 0.5).unwrap();
        let t = orbit(&s, &f, &vec![1.0], 30).unwrap();
        for (k, a) in t.dists.iter().enumerate() {
            assert_eq!(*a, 1.0 - 0.5f64.powi(k as i32));
        }
        assert!(t.checks.all_passed());
    }

    #[test]
    fn invalid_points_report_step() {
        let s = Euclidean::hilbert(1);
        let f = Semicontraction::<Euclidean>::new("blow-up", |x: &Vec<f64>| {
            if x[0] > 2.5 {
                vec![f64::NAN]
            } else {
                vec![x[0] + 1.0]
            }
        });
        let err = orbit(&s, &f, &vec![0.0], 10).unwrap_err();
        assert!(matches!(err, Error::InvalidOrbitPoint { step: 4, .. }));
        assert!(orbit(&s, &f, &vec![0.0], 0).is_err());
    }

    #[test]
    fn subadditivity_detects_violation() {
        assert!(subadditivity_violation(&[0.0, 1.0, 3.0]) > 0.0);
        assert_eq!(subadditivity_violation(&[0.0, 1.0, 2.0, 3.0]), 0.0);
    }
}
