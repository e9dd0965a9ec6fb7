use serde::Serialize;

use crate::error::Result;
use crate::metric::Space;
use crate::report::Check;
use crate::spectral::orbit::{drift, orbit};
use crate::spectral::semicontraction::Semicontraction;

#[derive(Debug, Clone, Serialize)]
pub struct TracialReport {
    pub tau_fg: f64,
    pub tau_gf: f64,
    pub difference: f64,
    /// Sum of the convergence gaps of the two drift estimates.
    pub combined_gap: f64,
    pub check: Check,
}

/// Compares the drifts of `f ∘ g` and `g ∘ f` from the base point. Passes
/// when the difference is within twice the combined convergence gap, or
/// within `floor` when both orbits have already converged.
pub fn tracial_check<S: Space>(
    space: &S,
    f: &Semicontraction<S>,
    g: &Semicontraction<S>,
    horizon: usize,
    floor: f64,
) -> Result<TracialReport> {
    let x0 = space.base_point();
    let fg = drift(&orbit(space, &f.compose(g), &x0, horizon)?)?;
    let gf = drift(&orbit(space, &g.compose(f), &x0, horizon)?)?;
    let difference = (fg.tau_hat - gf.tau_hat).abs();
    let combined_gap = fg.convergence_gap() + gf.convergence_gap();
    let check = Check::at_most(
        format!("tau({0}∘{1}) = tau({1}∘{0})", f.label(), g.label()),
        difference,
        (2.0 * combined_gap).max(floor),
        "tracial property",
    );
    Ok(TracialReport {
        tau_fg: fg.tau_hat,
        tau_gf: gf.tau_hat,
        difference,
        combined_gap,
        check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::seeded;
    use crate::spaces::disk::{Mobius, PoincareDisk};
    use crate::spaces::euclidean::{translation, Euclidean};
    use num_complex::Complex64;
    use rand::Rng;

    #[test]
    fn identical_maps() {
        let s = Euclidean::hilbert(2);
        let f = translation(&s, &[1.0, 2.0]).unwrap();
        let r = tracial_check(&s, &f, &f, 100, 0.0).unwrap();
        assert_eq!(r.difference, 0.0);
        assert!(r.check.passed);
    }

    #[test]
    fn translations_commute() {
        let s = Euclidean::hilbert(2);
        let f = translation(&s, &[3.0, 0.0]).unwrap();
        let g = translation(&s, &[0.0, 4.0]).unwrap();
        let r = tracial_check(&s, &f, &g, 100, 1e-12).unwrap();
        assert!((r.tau_fg - 5.0).abs() < 1e-12 && (r.tau_gf - 5.0).abs() < 1e-12);
        assert!(r.check.passed);
    }

    #[test]
    fn random_mobius_pairs() {
        let mut rng = seeded(21);
        for _ in 0..5 {
            let mut draw = || {
                let beta = Complex64::from_polar(
                    rng.random_range(0.1..0.9),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
                let alpha =
                    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                Mobius::new(alpha, beta).unwrap().into_map("m")
            };
            let (f, g) = (draw(), draw());
            let r = tracial_check(&PoincareDisk, &f, &g, 10_000, 1e-9).unwrap();
            assert!(r.difference < 1e-3, "{r:?}");
            assert!(r.check.passed, "{r:?}");
        }
    }
}
