use serde::Serialize;

use crate::ergodic::driver::CocycleDriver;
use crate::ergodic::family::CocycleFamily;
use crate::error::{parameter, Result};
use crate::report::{Check, CheckList};
use crate::spectral::orbit::{drift_from_dists, DriftEstimate};

/// Number of shifted windows on which subadditivity is checked.
const WINDOWS: usize = 8;

/// `a(n, omega) = d(x0, Z_n(omega) x0)` for `n = 0..=horizon`, with the
/// choices `c_k` of the maps `f_{T^k omega}`.
#[derive(Debug, Clone, Serialize)]
pub struct CocycleTrace<P> {
    pub a: Vec<f64>,
    pub choice_log: Vec<usize>,
    #[serde(skip)]
    pub x0: P,
    pub checks: CheckList,
}

impl<P> CocycleTrace<P> {
    pub fn horizon(&self) -> usize {
        self.choice_log.len()
    }

    /// `a(n) / n` with Fekete diagnostics.
    pub fn drift(&self) -> Result<DriftEstimate> {
        drift_from_dists(&self.a)
    }

    pub fn tau_hat(&self) -> f64 {
        self.a[self.horizon()] / self.horizon() as f64
    }
}

/// Composes the first `n` maps of the driver, new maps entering on the
/// right: `Z_{n+1} = Z_n ∘ f_{T^n omega}`. The base point is the family's.
pub fn compose_cocycle<F: CocycleFamily>(
    driver: &CocycleDriver<F>,
    n: usize,
) -> Result<CocycleTrace<F::Point>> {
    if n == 0 {
        return Err(parameter("horizon must be at least 1"));
    }
    let choice_log = driver.choices(n);
    let a = driver.family.prefix(&choice_log)?;
    let mut checks = CheckList::default();
    checks.push(Check::at_most(
        "a(n+m) <= a(n) + a(m, T^n omega) on logged windows",
        subadditivity_excess(&driver.family, &a, &choice_log)?,
        1e-9,
        "subadditive cocycle",
    ));
    Ok(CocycleTrace {
        a,
        choice_log,
        x0: driver.family.x0(),
        checks,
    })
}

/// Worst relative excess of `a(n+m) - a(n) - a(m, T^n omega)` over the
/// windows starting at `WINDOWS` evenly spaced `n`.
fn subadditivity_excess<F: CocycleFamily>(family: &F, a: &[f64], choices: &[usize]) -> Result<f64> {
    let horizon = choices.len();
    let mut starts: Vec<usize> = (1..=WINDOWS)
        .map(|j| j * horizon / (WINDOWS + 1))
        .filter(|n| *n >= 1)
        .collect();
    starts.dedup();
    let mut worst = 0.0f64;
    for n in starts {
        let tail = family.shifted(choices, n)?;
        for (m, b) in tail.iter().enumerate().skip(1) {
            let excess = (a[n + m] - a[n] - b) / (1.0 + a[n].abs() + b.abs());
            worst = worst.max(excess);
        }
    }
    Ok(worst)
}
