//! Record times along an orbit and the functional they produce.
//!
//! With `b(n) = a_n - (l - eps) n`, a record time is an `n` where `b(n)`
//! exceeds every earlier value. Anchoring the internal functional at the
//! orbit point of a record time `N` gives `h(f^k x0) <= -(l - eps) k` for all
//! `k <= N`, since `d(f^k x0, f^N x0) <= a_{N-k}`.

use serde::Serialize;

use crate::error::{parameter, precondition, Error, Result};
use crate::functional::{FunctionalTag, MetricFunctional};
use crate::metric::{sample_points, scaled, Space};
use crate::report::{Check, CheckList};
use crate::spectral::orbit::{drift, orbit, OrbitTrace};
use crate::spectral::semicontraction::Semicontraction;

/// Seed of the probe set used for catalog matching.
pub const PROBE_SEED: u64 = 0x5eed;
pub const PROBE_COUNT: usize = 20;

/// Record times of `b(n) = a_n - (tau_hat - eps) n` with `tau_hat = a_N / N`.
pub fn record_times<P>(trace: &OrbitTrace<P>, eps: f64) -> Result<Vec<usize>> {
    let tau_hat = drift(trace)?.tau_hat;
    record_times_with(&trace.dists, tau_hat, eps)
}

/// Record times of `b(n) = a_n - (l - eps) n` over `n = 1..=N`, compared
/// against all `0 <= m < n`.
pub fn record_times_with(dists: &[f64], l: f64, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(parameter("eps must be positive"));
    }
    let slope = l - eps;
    let mut running_max = dists[0];
    let mut out = Vec::new();
    for (n, a) in dists.iter().enumerate().skip(1) {
        let b = a - slope * n as f64;
        if b > running_max {
            out.push(n);
            running_max = b;
        }
    }
    Ok(out)
}

/// Closest closed-form catalog element to an extracted functional.
#[derive(Debug, Clone)]
pub struct CatalogMatch<S: Space> {
    pub functional: MetricFunctional<S>,
    /// `max |h(y) - h_catalog(y)|` over the probe set.
    pub max_probe_gap: f64,
}

#[derive(Debug, Clone)]
pub struct Extraction<S: Space> {
    /// Anchored at the orbit point of the selected record time.
    pub functional: MetricFunctional<S>,
    pub record_time: usize,
    pub eps: f64,
    pub tau_hat: f64,
    /// Number of records at the selected eps.
    pub record_count: usize,
    /// `h(f^k x0) <= -(tau_hat - eps) k` and `h(f^k x0) >= -a_k` for `k <= record_time`.
    pub certificate: CheckList,
    pub catalog_match: Option<CatalogMatch<S>>,
    pub trace: OrbitTrace<S::Point>,
}

/// Compares `h` with the catalog element the space associates with `anchor`.
pub fn match_catalog<S: Space>(
    space: &S,
    h: &MetricFunctional<S>,
    anchor: &S::Point,
) -> Option<CatalogMatch<S>> {
    let tag = space.boundary_match(anchor)?;
    let functional = MetricFunctional::new(space, tag).ok()?;
    let max_probe_gap = sample_points(space, PROBE_COUNT, PROBE_SEED)
        .iter()
        .map(|y| (h.eval(space, y) - functional.eval(space, y)).abs())
        .fold(0.0, f64::max);
    Some(CatalogMatch {
        functional,
        max_probe_gap,
    })
}

/// Runs the record-time construction on the orbit of `x0`, which must be the
/// base point of the space (the functional is normalized there).
///
/// The schedule is scanned from its largest to its smallest value; the
/// smallest eps with a nonempty record set is used, and the functional is
/// anchored at its largest record time.
pub fn extract_functional<S: Space>(
    space: &S,
    f: &Semicontraction<S>,
    x0: &S::Point,
    eps_schedule: &[f64],
    horizon: usize,
) -> Result<Extraction<S>> {
    if !space.points_equal(x0, &space.base_point(), 1e-12) {
        return Err(precondition(
            "extraction starts at the base point of the space",
        ));
    }
    if eps_schedule.is_empty() || eps_schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(parameter("eps schedule must be nonempty and positive"));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(parameter("eps schedule must be strictly decreasing"));
    }
    let trace = orbit(space, f, x0, horizon)?;
    let tau_hat = drift(&trace)?.tau_hat;
    let mut chosen = None;
    for &eps in eps_schedule {
        let records = record_times_with(&trace.dists, tau_hat, eps)?;
        if let Some(&last) = records.last() {
            chosen = Some((eps, last, records.len()));
        }
    }
    let (eps, record_time, record_count) = chosen.ok_or(Error::HorizonExhausted { horizon })?;
    let anchor = trace.points[record_time].clone();
    let functional = MetricFunctional::new(
        space,
        FunctionalTag::Empirical {
            anchor: anchor.clone(),
            record_time,
            eps,
        },
    )?;

    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for k in 0..=record_time {
        let hk = functional.eval(space, &trace.points[k]);
        let bound = -(tau_hat - eps) * k as f64;
        upper = upper.max((hk - bound) / (1.0 + trace.dists[record_time].abs()));
        lower = lower.max((-trace.dists[k] - hk) / (1.0 + trace.dists[k].abs()));
    }
    let mut certificate = CheckList::default();
    certificate.push(Check::at_most(
        "h(f^k x0) <= -(tau_hat - eps) k up to the record time",
        upper,
        1e-9,
        "record-time inequality",
    ));
    certificate.push(Check::at_most(
        "h(f^k x0) >= -a_k",
        lower,
        1e-9,
        "triangle inequality",
    ));
    let catalog_match = match_catalog(space, &functional, &anchor);
    Ok(Extraction {
        functional,
        record_time,
        eps,
        tau_hat,
        record_count,
        certificate,
        catalog_match,
        trace,
    })
}

/// Slack allowed in the descent inequality: `absolute + per_step * k` at step `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slack {
    pub absolute: f64,
    pub per_step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    /// `max_k h(f^k x0) + tau k - per_step k`.
    pub max_excess: f64,
    /// `-h(f^k x0) / k` for `k = 1..=n`.
    pub rates: Vec<f64>,
    pub terminal_rate: f64,
    /// `max_k -a_k - h(f^k x0)`, which must not be positive.
    pub lower_bound_violation: f64,
    pub checks: CheckList,
}

/// Checks `h(f^k x0) <= -tau k + slack`, the terminal rate `-h(f^n x0)/n`
/// against `tau` within `rate_tol`, and the lower bound `h(f^k x0) >= -a_k`.
pub fn verify_descent<S: Space>(
    space: &S,
    h: &MetricFunctional<S>,
    trace: &OrbitTrace<S::Point>,
    tau: f64,
    slack: Slack,
    rate_tol: f64,
) -> DescentReport {
    let n = trace.horizon();
    let values: Vec<f64> = trace.points.iter().map(|p| h.eval(space, p)).collect();
    let mut max_excess = f64::NEG_INFINITY;
    let mut lower_bound_violation = f64::NEG_INFINITY;
    for (k, hk) in values.iter().enumerate() {
        max_excess = max_excess.max(hk + tau * k as f64 - slack.per_step * k as f64);
        lower_bound_violation = lower_bound_violation.max(-trace.dists[k] - hk);
    }
    let rates: Vec<f64> = values
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, hk)| -hk / k as f64)
        .collect();
    let terminal_rate = rates.last().copied().unwrap_or(0.0);
    let mut checks = CheckList::default();
    checks.push(Check::at_most(
        "h(f^k x0) + tau k within slack",
        max_excess,
        slack.absolute,
        "descent inequality",
    ));
    checks.push(Check::at_most(
        format!("terminal rate -h(f^n x0)/n at n = {n} matches tau"),
        (terminal_rate - tau).abs(),
        rate_tol,
        "rate of descent equals drift",
    ));
    checks.push(Check::at_most(
        "h(f^k x0) >= -a_k",
        lower_bound_violation,
        scaled(1e-9, trace.dists[n]),
        "triangle inequality",
    ));
    DescentReport {
        max_excess,
        rates,
        terminal_rate,
        lower_bound_violation,
        checks,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseBoundReport {
    pub tau_forward: f64,
    pub tau_inverse: f64,
    /// `min_n h(f^{-n} x0) - tau_inverse n`.
    pub backward_margin: f64,
    /// `max_n h(f^n x0) + tau_forward n`.
    pub forward_excess: f64,
    pub checks: CheckList,
}

/// For an isometry with inverse: checks `h(f^{-n} x0) >= tau(f^{-1}) n - slack`
/// on the backward orbit, and logs the forward descent alongside.
pub fn isometry_inverse_bound<S: Space>(
    space: &S,
    f: &Semicontraction<S>,
    h: &MetricFunctional<S>,
    horizon: usize,
    slack: Slack,
) -> Result<InverseBoundReport> {
    if !f.is_isometry() {
        return Err(Error::Unsupported(format!(
            "{} is not flagged as an isometry",
            f.label()
        )));
    }
    let inv = f
        .inverse()
        .ok_or_else(|| Error::Unsupported(format!("{} has no inverse", f.label())))?;
    let x0 = space.base_point();
    let fwd = orbit(space, f, &x0, horizon)?;
    let back = orbit(space, &inv, &x0, horizon)?;
    let tau_forward = drift(&fwd)?.tau_hat;
    let tau_inverse = drift(&back)?.tau_hat;
    let mut backward_margin = f64::INFINITY;
    let mut forward_excess = f64::NEG_INFINITY;
    for k in 0..=horizon {
        let kf = k as f64;
        backward_margin = backward_margin
            .min(h.eval(space, &back.points[k]) - tau_inverse * kf + slack.per_step * kf);
        forward_excess = forward_excess
            .max(h.eval(space, &fwd.points[k]) + tau_forward * kf - slack.per_step * kf);
    }
    let mut checks = CheckList::default();
    checks.push(Check::at_least(
        "h(f^-n x0) - tau(f^-1) n",
        backward_margin,
        -slack.absolute,
        "inverse isometry bound",
    ));
    checks.extend(back.checks.clone());
    Ok(InverseBoundReport {
        tau_forward,
        tau_inverse,
        backward_margin,
        forward_excess,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::disk::{disk_busemann, Mobius, PoincareDisk};
    use crate::spaces::euclidean::{hilbert_functional, rotation, translation, Euclidean, Radius};
    use crate::tolerances::default_eps_schedule;
    use num_complex::Complex64;

    fn hyperbolic() -> Semicontraction<PoincareDisk> {
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        Mobius::from_matrix([[one, half], [half, one]])
            .unwrap()
            .into_map("hyp")
    }

    #[test]
    fn translation_records_everywhere() {
        let s = Euclidean::hilbert(1);
        let t = orbit(&s, &translation(&s, &[1.0]).unwrap(), &vec![0.0], 50).unwrap();
        assert_eq!(record_times(&t, 0.1).unwrap(), (1..=50).collect::<Vec<_>>());
        assert!(record_times(&t, 0.0).is_err());
    }

    #[test]
    fn rotation_records_are_cofinal() {
        let s = Euclidean::hilbert(2);
        let t = orbit(&s, &rotation(&s, 1.0).unwrap(), &vec![1.0, 0.0], 1000).unwrap();
        let tau = drift(&t).unwrap().tau_hat;
        let r = record_times_with(&t.dists, 0.0, 0.1).unwrap();
        assert!(r.len() > 50 && *r.last().unwrap() > 950);
        assert!(!record_times(&t, 0.1).unwrap().is_empty());
        assert!(tau < 0.01);
    }

    #[test]
    fn hyperbolic_records_nonempty() {
        let t = orbit(
            &PoincareDisk,
            &hyperbolic(),
            &PoincareDisk.base_point(),
            1000,
        )
        .unwrap();
        let r = record_times(&t, 0.01).unwrap();
        assert!(!r.is_empty() && *r.last().unwrap() == 1000);
    }

    #[test]
    fn translation_extraction_matches_linear_dual() {
        let s = Euclidean::hilbert(3);
        let c = [3.0, 0.0, 4.0];
        let f = translation(&s, &c).unwrap();
        let ex = extract_functional(&s, &f, &vec![0.0; 3], &default_eps_schedule(), 2000).unwrap();
        assert!(ex.certificate.all_passed());
        let m = ex.catalog_match.unwrap();
        assert_eq!(
            m.functional.tag(),
            &FunctionalTag::LinearDual {
                v: vec![0.6, 0.0, 0.8]
            }
        );
        assert!(m.max_probe_gap < 1e-2);
        let lin = hilbert_functional(&s, Radius::Infinite, &[0.6, 0.0, 0.8]).unwrap();
        let rep = verify_descent(
            &s,
            &lin,
            &ex.trace,
            5.0,
            Slack {
                absolute: 1e-9,
                per_step: 0.0,
            },
            1e-12,
        );
        assert!(rep.checks.all_passed(), "{:?}", rep.checks);
    }

    #[test]
    fn extraction_preconditions() {
        let s = Euclidean::hilbert(1);
        let f = translation(&s, &[1.0]).unwrap();
        assert!(matches!(
            extract_functional(&s, &f, &vec![1.0], &[0.5], 10),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            extract_functional(&s, &f, &vec![0.0], &[0.25, 0.5], 10),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            extract_functional(&s, &f, &vec![0.0], &[], 10),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn hyperbolic_descent() {
        let f = hyperbolic();
        let ex = extract_functional(
            &PoincareDisk,
            &f,
            &PoincareDisk.base_point(),
            &default_eps_schedule(),
            400,
        )
        .unwrap();
        assert!(ex.certificate.all_passed(), "{:?}", ex.certificate);
        let h = disk_busemann(Complex64::new(1.0, 0.0)).unwrap();
        let rep = verify_descent(
            &PoincareDisk,
            &h,
            &ex.trace.prefix(200),
            3f64.ln(),
            Slack {
                absolute: 1e-9,
                per_step: 0.0,
            },
            1e-3,
        );
        assert!(rep.checks.all_passed(), "{:?}", rep.checks);
        let inv = isometry_inverse_bound(
            &PoincareDisk,
            &f,
            &h,
            100,
            Slack {
                absolute: 1e-6,
                per_step: 0.0,
            },
        )
        .unwrap();
        assert!(inv.checks.all_passed(), "{:?}", inv.checks);
    }

    #[test]
    fn translation_inverse_bound_is_exact() {
        let s = Euclidean::hilbert(2);
        let f = translation(&s, &[3.0, 4.0]).unwrap();
        let h = hilbert_functional(&s, Radius::Infinite, &[0.6, 0.8]).unwrap();
        let rep = isometry_inverse_bound(
            &s,
            &f,
            &h,
            50,
            Slack {
                absolute: 1e-12,
                per_step: 0.0,
            },
        )
        .unwrap();
        assert!(rep.backward_margin.abs() < 1e-9);
        assert!(rep.checks.all_passed());
        let half = crate::spaces::euclidean::scaling(&s, 0.5).unwrap();
        assert!(matches!(
            isometry_inverse_bound(
                &s,
                &half,
                &h,
                5,
                Slack {
                    absolute: 0.0,
                    per_step: 0.0
                }
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn rotation_inverse_bound_reduces_to_functional_bound() {
        let s = Euclidean::hilbert(2);
        let f = rotation(&s, 1.0).unwrap();
        let h = crate::functional::internal_functional(&s, &vec![2.0, 1.0]).unwrap();
        let rep = isometry_inverse_bound(
            &s,
            &f,
            &h,
            100,
            Slack {
                absolute: 1e-9,
                per_step: 0.0,
            },
        )
        .unwrap();
        assert_eq!(rep.tau_inverse, 0.0);
        assert!(rep.checks.all_passed());
    }
}
