//! Growth of simple closed curves under random mapping classes of the torus.
//!
//! For the cocycle `Z_n` of a [`MappingClassFamily`] the lengths
//! `l_{Z_k x0}(alpha)` grow like `e^{tau k}` for typical curves, where `tau`
//! is the drift of `a(n) = L(x0, Z_n x0)` in the Thurston metric.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::ergodic::cocycle::compose_cocycle;
use crate::ergodic::driver::CocycleDriver;
use crate::ergodic::family::MappingClassFamily;
use crate::ergodic::records::{km_record_times, KmRecords};
use crate::error::{parameter, Result};
use crate::report::{Check, CheckList};
use crate::spaces::torus::{gram_form, Curve};

/// Number of logged additive-gap samples.
const GAP_SAMPLES: usize = 64;

pub fn default_basis() -> Vec<Curve> {
    vec![
        Curve { p: 1, q: 0 },
        Curve { p: 0, q: 1 },
        Curve { p: 1, q: 1 },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveGrowth {
    pub curve: Curve,
    /// `ln l_{Z_k x0}(alpha)` for `k = 0..=n`.
    pub log_lengths: Vec<f64>,
    /// `(1/n) ln l_{Z_n x0}(alpha)`.
    pub terminal_rate: f64,
    /// `a(n) / n`.
    pub tau_hat: f64,
    /// `|terminal_rate - tau_hat|`.
    pub terminal_gap: f64,
    pub checks: CheckList,
}

impl CurveGrowth {
    /// `(1/k) ln l_{Z_k x0}(alpha)`.
    pub fn rate(&self, k: usize) -> f64 {
        self.log_lengths[k] / k as f64
    }
}

fn check_curve(alpha: Curve) -> Result<Curve> {
    Curve::new(alpha.p, alpha.q)
}

pub fn curve_growth(
    driver: &CocycleDriver<MappingClassFamily>,
    alpha: Curve,
    n: usize,
) -> Result<CurveGrowth> {
    let alpha = check_curve(alpha)?;
    let trace = compose_cocycle(driver, n)?;
    let log_lengths = driver.family.log_lengths(&trace.choice_log, alpha);
    let terminal_rate = log_lengths[n] / n as f64;
    let tau_hat = trace.tau_hat();
    let mut checks = trace.checks.clone();
    // l_{Z_k x0}(alpha) / l_{x0}(alpha) <= e^{a(k)}
    let excess = log_lengths
        .iter()
        .zip(&trace.a)
        .map(|(l, a)| (l - log_lengths[0] - a) / (1.0 + a.abs()))
        .fold(0.0f64, f64::max);
    checks.push(Check::at_most(
        "length ratio bounded by e^{a(k)}",
        excess,
        1e-9,
        "Thurston metric as sup of ratios",
    ));
    Ok(CurveGrowth {
        curve: alpha,
        log_lengths,
        terminal_rate,
        tau_hat,
        terminal_gap: (terminal_rate - tau_hat).abs(),
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominantCurve {
    pub curve: Curve,
    /// How often each basis curve realized the maximal ratio at a record index.
    pub selections: Vec<(Curve, usize)>,
    /// The largest record index at which `curve` realizes the maximum.
    pub top_record: Option<usize>,
    pub records: KmRecords,
    pub tau_hat: f64,
    /// `(k, a(k) - max_mu ln(l_{Z_k x0}(alpha) / l_{x0}(alpha)))`.
    pub gap_log: Vec<(usize, f64)>,
    /// Bound on the additive gap implied by the angular spread of the basis.
    pub gap_bound: f64,
    pub checks: CheckList,
}

/// `-ln cos(g / 2)` for the widest angular gap `g` between the basis
/// directions in the Euclidean structure of `x0`; infinite for a single direction.
fn angular_gap_bound(x0: num_complex::Complex64, basis: &[Curve]) -> f64 {
    let r = gram_form(x0).cholesky().expect("positive definite").l();
    let mut angles: Vec<f64> = basis
        .iter()
        .map(|c| {
            let u = r.transpose() * nalgebra::Vector2::new(c.p as f64, c.q as f64);
            u.y.atan2(u.x).rem_euclid(PI)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut widest = angles[0] + PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        widest = widest.max(w[1] - w[0]);
    }
    if widest >= PI - 1e-12 {
        f64::INFINITY
    } else {
        -(widest / 2.0).cos().ln()
    }
}

/// Pigeonhole selection of the basis curve that realizes the maximal
/// length ratio most often across the record indices at tolerance `eps`
/// (ties go to the smallest curve), with the lower bound
/// `l_{Z_k x0}(alpha_1) >= l_{Z_m x0}(alpha_1) e^{-a(m)} e^{(tau - eps) k}`
/// checked at the top record `m` for `k = 0` and `K_eps <= k <= m`.
pub fn dominant_curve(
    driver: &CocycleDriver<MappingClassFamily>,
    basis: &[Curve],
    n: usize,
    eps: f64,
) -> Result<DominantCurve> {
    if basis.is_empty() {
        return Err(parameter("curve basis is empty"));
    }
    let mut basis: Vec<Curve> = basis
        .iter()
        .map(|c| check_curve(*c))
        .collect::<Result<_>>()?;
    basis.sort();
    basis.dedup();
    let family = &driver.family;
    let trace = compose_cocycle(driver, n)?;
    let records = km_record_times(family, &trace, eps, None)?;
    let tau_hat = trace.tau_hat();
    let log_ratios: Vec<Vec<f64>> = basis
        .iter()
        .map(|c| {
            let l = family.log_lengths(&trace.choice_log, *c);
            l.iter().map(|x| x - l[0]).collect()
        })
        .collect();
    let argmax = |k: usize| {
        let mut best = 0;
        for j in 1..basis.len() {
            if log_ratios[j][k] > log_ratios[best][k] {
                best = j;
            }
        }
        best
    };

    let mut checks = trace.checks.clone();
    checks.extend(records.checks.clone());
    let selection_times = if records.indices.is_empty() {
        vec![n]
    } else {
        records.indices.clone()
    };
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &k in &selection_times {
        *counts.entry(argmax(k)).or_default() += 1;
    }
    let chosen = counts
        .iter()
        .fold(
            (0usize, 0usize),
            |acc, (j, c)| if *c > acc.1 { (*j, *c) } else { acc },
        )
        .0;
    let top_record = records
        .indices
        .iter()
        .rev()
        .copied()
        .find(|k| argmax(*k) == chosen);

    if let (Some(m), Some(lag)) = (top_record, records.k_eps) {
        let ratios = &log_ratios[chosen];
        let bound = |k: usize| ratios[m] - trace.a[m] + (tau_hat - eps) * k as f64;
        let worst = std::iter::once(0)
            .chain(lag.min(m)..=m)
            .map(|k| (bound(k) - ratios[k]) / (1.0 + trace.a[m].abs()))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most(
            format!("dominant-curve lower bound at n = {m}"),
            worst.max(0.0),
            1e-9,
            "record inequality and isometric invariance",
        ));
    }
    let growth_excess = records
        .indices
        .iter()
        .flat_map(|&k| {
            log_ratios
                .iter()
                .map(move |r| r[k] / k as f64 - tau_hat - eps)
        })
        .fold(0.0f64, f64::max);
    checks.push(Check::at_most(
        "max_mu (1/k) ln(l_k / l_0) <= tau + eps at records",
        growth_excess,
        1e-9,
        "no curve grows faster than the drift",
    ));

    let gap_bound = angular_gap_bound(family.x0, &basis);
    let mut sample: Vec<usize> = (0..=GAP_SAMPLES).map(|j| j * n / GAP_SAMPLES).collect();
    sample.dedup();
    let gap_log: Vec<(usize, f64)> = sample
        .into_iter()
        .map(|k| (k, trace.a[k] - log_ratios[argmax(k)][k]))
        .collect();
    let max_gap = gap_log.iter().map(|g| g.1).fold(0.0f64, f64::max);
    checks.push(Check::at_most(
        "additive gap to the sup over all curves",
        max_gap,
        gap_bound + 1e-9,
        "basis angular spread",
    ));

    Ok(DominantCurve {
        curve: basis[chosen],
        selections: counts.into_iter().map(|(j, c)| (basis[j], c)).collect(),
        top_record,
        records,
        tau_hat,
        gap_log,
        gap_bound,
        checks,
    })
}
