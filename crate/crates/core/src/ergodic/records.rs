//! Karlsson–Margulis record times of a subadditive cocycle.
//!
//! An index `n` is a record for lag `K` when
//! `a(n, omega) - a(n - k, T^k omega) >= (tau - eps) k` for every `K <= k <= n`.
//! The tails `a(., T^k omega)` are recomposed from the choice log.

use serde::Serialize;

use crate::ergodic::cocycle::CocycleTrace;
use crate::ergodic::family::CocycleFamily;
use crate::error::{parameter, Result};
use crate::report::{Check, CheckList};

#[derive(Debug, Clone, Serialize)]
pub struct KmRecords {
    /// Record indices in increasing order.
    pub indices: Vec<usize>,
    /// The lag threshold `K_eps` used; `None` when no index qualifies for any lag.
    pub k_eps: Option<usize>,
    pub eps: f64,
    pub tau_hat: f64,
    /// `lags[n]` is the least `K` for which the condition holds at `n`
    /// (`n + 1` when even `k = n` fails).
    pub lags: Vec<usize>,
    pub checks: CheckList,
}

fn slack(a: f64) -> f64 {
    1e-9 * (1.0 + a.abs())
}

/// `lags[n] - 1` is the largest `k <= n` violating the record condition.
fn lag_profile<F: CocycleFamily>(
    family: &F,
    a: &[f64],
    choices: &[usize],
    rate: f64,
) -> Result<Vec<usize>> {
    let horizon = choices.len();
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(horizon.max(1));
    let partials: Vec<Result<Vec<usize>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    let mut worst = vec![0usize; horizon + 1];
                    // interleaved k balances the O(horizon - k) cost per tail
                    for k in (1 + t..=horizon).step_by(threads) {
                        let tail = family.shifted(choices, k)?;
                        for n in k..=horizon {
                            if a[n] - tail[n - k] < rate * k as f64 - slack(a[n]) {
                                worst[n] = worst[n].max(k);
                            }
                        }
                    }
                    Ok(worst)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("record scan thread panicked"))
            .collect()
    });
    let mut lags = vec![0usize; horizon + 1];
    for part in partials {
        for (l, w) in lags.iter_mut().zip(part?) {
            *l = (*l).max(w);
        }
    }
    Ok(lags.into_iter().map(|w| w + 1).collect())
}

/// Record indices at tolerance `eps` with `tau` estimated by `a(N)/N`.
///
/// With `lag = None` the threshold is the least lag achieved by any index in
/// the second half of the trace that also satisfies the sandwich
/// `(tau - eps) n <= a(n) <= (tau + eps) n`.
pub fn km_record_times<F: CocycleFamily>(
    family: &F,
    trace: &CocycleTrace<F::Point>,
    eps: f64,
    lag: Option<usize>,
) -> Result<KmRecords> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(parameter("eps must be positive"));
    }
    if lag == Some(0) {
        return Err(parameter("lag threshold must be at least 1"));
    }
    let horizon = trace.horizon();
    let tau_hat = trace.tau_hat();
    let a = &trace.a;
    let lags = lag_profile(family, a, &trace.choice_log, tau_hat - eps)?;
    let sandwich_gap = |n: usize| {
        let n_f = n as f64;
        ((tau_hat - eps) * n_f - a[n]).max(a[n] - (tau_hat + eps) * n_f)
    };
    let candidate = |n: usize| lags[n] <= n && sandwich_gap(n) <= slack(a[n]);
    let k_eps = lag.or_else(|| {
        let second_half = (horizon / 2).max(1)..=horizon;
        second_half
            .clone()
            .filter(|n| candidate(*n))
            .map(|n| lags[n])
            .min()
            .or_else(|| {
                (1..=horizon)
                    .filter(|n| candidate(*n))
                    .map(|n| lags[n])
                    .min()
            })
    });
    let indices: Vec<usize> = match k_eps {
        Some(k) => (1..=horizon)
            .filter(|n| candidate(*n) && lags[*n] <= k)
            .collect(),
        None => Vec::new(),
    };
    let mut checks = CheckList::default();
    checks.push(Check::flag(
        "record set is nonempty",
        !indices.is_empty(),
        "existence of record times",
    ));
    let worst = indices
        .iter()
        .map(|n| sandwich_gap(*n) / (1.0 + a[*n].abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most(
        "(tau - eps) n <= a(n) <= (tau + eps) n at records",
        worst.max(0.0),
        1e-9,
        "record sandwich",
    ));
    Ok(KmRecords {
        indices,
        k_eps,
        eps,
        tau_hat,
        lags,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::cocycle::compose_cocycle;
    use crate::ergodic::driver::{ChoiceProcess, CocycleDriver};
    use crate::ergodic::family::PointFamily;
    use crate::spaces::euclidean::{translation, Euclidean};

    fn translations(steps: &[f64]) -> PointFamily<Euclidean> {
        let s = Euclidean::hilbert(1);
        let maps = steps
            .iter()
            .map(|c| translation(&s, &[*c]).unwrap())
            .collect();
        PointFamily::new(s, maps, vec![0.0]).unwrap()
    }

    #[test]
    fn single_translation_every_index_with_unit_lag() {
        let driver = CocycleDriver::deterministic(translations(&[2.5])).unwrap();
        let trace = compose_cocycle(&driver, 50).unwrap();
        let r = km_record_times(&driver.family, &trace, 0.1, None).unwrap();
        assert_eq!(r.k_eps, Some(1));
        assert_eq!(r.indices, (1..=50).collect::<Vec<_>>());
        assert!(r.checks.all_passed());
    }

    #[test]
    fn brute_force_agreement_and_monotonicity() {
        let driver = CocycleDriver::new(
            ChoiceProcess::Iid {
                weights: vec![0.5, 0.5],
            },
            3,
            translations(&[1.0, 3.0]),
        )
        .unwrap();
        let trace = compose_cocycle(&driver, 120).unwrap();
        let tau = trace.tau_hat();
        for eps in [0.05, 0.2, 0.8] {
            let r = km_record_times(&driver.family, &trace, eps, Some(10)).unwrap();
            // a(n - k, T^k omega) = a(n) - a(k) for translations
            let brute: Vec<usize> = (1..=120)
                .filter(|&n| (10..=n).all(|k| trace.a[k] >= (tau - eps) * k as f64 - 1e-9))
                .filter(|&n| {
                    let n_f = n as f64;
                    (tau - eps) * n_f <= trace.a[n] + 1e-9 && trace.a[n] <= (tau + eps) * n_f + 1e-9
                })
                .collect();
            assert_eq!(r.indices, brute, "eps = {eps}");
        }
        let mut previous: Vec<usize> = Vec::new();
        for eps in [0.01, 0.05, 0.1, 0.3, 1.0, 3.0] {
            let r = km_record_times(&driver.family, &trace, eps, Some(5)).unwrap();
            assert!(previous.iter().all(|n| r.indices.contains(n)));
            previous = r.indices;
        }
    }

    #[test]
    fn iid_translations_have_records() {
        let driver = CocycleDriver::new(
            ChoiceProcess::Iid {
                weights: vec![0.5, 0.5],
            },
            8,
            translations(&[1.0, 3.0]),
        )
        .unwrap();
        let trace = compose_cocycle(&driver, 400).unwrap();
        let r = km_record_times(&driver.family, &trace, 0.2, None).unwrap();
        assert!(!r.indices.is_empty());
        assert!(r.checks.all_passed(), "{:?}", r.checks);
    }

    #[test]
    fn rejects_bad_eps() {
        let driver = CocycleDriver::deterministic(translations(&[1.0])).unwrap();
        let trace = compose_cocycle(&driver, 5).unwrap();
        assert!(km_record_times(&driver.family, &trace, 0.0, None).is_err());
        assert!(km_record_times(&driver.family, &trace, -1.0, None).is_err());
        assert!(km_record_times(&driver.family, &trace, 0.1, Some(0)).is_err());
    }
}
