//! Orbits of fixed-point-free holomorphic self-maps of the disk converge to
//! the Denjoy–Wolff point, and the extracted functional is its Busemann
//! function.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::metric::sample_points;
use crate::report::{Check, CheckList};
use crate::spaces::disk::{disk_busemann, DiskPoint, PoincareDisk};
use crate::spectral::principle::{extract_functional, PROBE_COUNT, PROBE_SEED};
use crate::spectral::semicontraction::{Boundary, Semicontraction};

#[derive(Debug, Clone, Serialize)]
pub struct WolffDenjoyReport {
    pub zeta: [f64; 2],
    pub terminal: [f64; 2],
    /// `|f^n(0) - zeta|`.
    pub euclidean_gap: f64,
    /// `max |h(y) - h_zeta(y)|` on the probe set.
    pub probe_gap: f64,
    pub tau_hat: f64,
    pub record_time: usize,
    pub eps: f64,
    pub checks: CheckList,
}

/// Runs the orbit of 0 under `f`, whose oracle must declare the boundary
/// point `zeta`, and compares both the orbit and the extracted functional
/// with `zeta` and its Busemann function.
pub fn wolff_denjoy(
    f: &Semicontraction<PoincareDisk>,
    horizon: usize,
    eps_schedule: &[f64],
    point_tol: f64,
    probe_tol: f64,
) -> Result<WolffDenjoyReport> {
    let zeta = match &f.oracle().boundary {
        Some(Boundary::Disk(z)) => *z,
        _ => {
            return Err(precondition(format!(
                "{} declares no Denjoy-Wolff point",
                f.label()
            )))
        }
    };
    let space = PoincareDisk;
    let ex = extract_functional(&space, f, &DiskPoint::ORIGIN, eps_schedule, horizon)?;
    let terminal: Complex64 = ex.trace.points[horizon].z();
    let euclidean_gap = (terminal - zeta).norm();
    let busemann = disk_busemann(zeta)?;
    let probe_gap = sample_points(&space, PROBE_COUNT, PROBE_SEED)
        .iter()
        .map(|y| (ex.functional.eval(&space, y) - busemann.eval(&space, y)).abs())
        .fold(0.0, f64::max);
    let mut checks = ex.trace.checks.clone();
    checks.extend(ex.certificate.clone());
    checks.push(Check::at_most(
        format!("|f^{horizon}(0) - zeta|"),
        euclidean_gap,
        point_tol,
        "Denjoy-Wolff point",
    ));
    checks.push(Check::at_most(
        "extracted functional matches the Busemann function of zeta",
        probe_gap,
        probe_tol,
        "disk Busemann closed form",
    ));
    Ok(WolffDenjoyReport {
        zeta: [zeta.re, zeta.im],
        terminal: [terminal.re, terminal.im],
        euclidean_gap,
        probe_gap,
        tau_hat: ex.tau_hat,
        record_time: ex.record_time,
        eps: ex.eps,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::disk::{Blaschke, Mobius};
    use crate::tolerances::default_eps_schedule;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hyperbolic_mobius() {
        let f = Mobius::new(c(1.0, 0.0), c(0.5, 0.0))
            .unwrap()
            .into_map("hyp");
        let r = wolff_denjoy(&f, 1000, &default_eps_schedule(), 1e-6, 1e-3).unwrap();
        assert!(r.checks.all_passed(), "{:?}", r.checks);
        assert!((r.tau_hat - 3f64.ln()).abs() < 1e-3);
        assert_eq!(r.zeta, [1.0, 0.0]);
    }

    #[test]
    fn blaschke_square() {
        let b = Blaschke::new(c(1.0, 0.0), vec![c(-0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let f = b.into_map("b", c(1.0, 0.0)).unwrap();
        let r = wolff_denjoy(&f, 1000, &default_eps_schedule(), 1e-6, 1e-3).unwrap();
        assert!(r.checks.all_passed(), "{:?}", r.checks);
        assert!((r.tau_hat - 1.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn elliptic_map_has_no_boundary_point() {
        let f = Mobius::rotation(1.0).into_map("rot");
        assert!(wolff_denjoy(&f, 10, &[0.1], 1e-6, 1e-3).is_err());
    }
}
