use metric_spectral::ergodic::{top_lyapunov, ChoiceProcess, CocycleDriver, MatrixFamily};
use metric_spectral::spaces::{
    hilbert_functional, thurston_dist, Blaschke, ConeMetric, DiskPoint, Euclidean, Mobius,
    PoincareDisk, PositiveCone, Radius, ThurstonMode, TorusTeich,
};
use metric_spectral::{sample_points, Space};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;

fn in_disk(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(rho, t)| Complex64::from_polar(rho, t))
}

fn modulus() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0, 0.2..3.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn pseudo_hyperbolic(z: Complex64, w: Complex64) -> f64 {
    ((z - w) / (Complex64::new(1.0, 0.0) - w.conj() * z)).norm()
}

fn triangle_gap<S: Space>(s: &S, x: &S::Point, y: &S::Point, z: &S::Point) -> f64 {
    let slack = s.dist_resolution(x, z) + s.dist_resolution(x, y) + s.dist_resolution(y, z);
    s.dist(x, z) - s.dist(x, y) - s.dist(y, z) - slack
}

/// `1/2 ln` of the top eigenvalue of `Q_x^{-1} Q_y`, through the symmetric
/// form `L^{-1} Q_y L^{-T}` with `Q_x = L L^T`.
fn thurston_by_eigen(x: Complex64, y: Complex64) -> f64 {
    let gram = |t: Complex64| Matrix2::new(1.0, t.re, t.re, t.norm_sqr()) / t.im;
    let l = gram(x).cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let m = li * gram(y) * li.transpose();
    0.5 * m.symmetric_eigenvalues().max().ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disk_distance_matches_pseudo_hyperbolic_form(z in in_disk(0.99), w in in_disk(0.99)) {
        let d = PoincareDisk.dist(&DiskPoint::new(z).unwrap(), &DiskPoint::new(w).unwrap());
        let oracle = 2.0 * pseudo_hyperbolic(z, w).atanh();
        prop_assert!((d - oracle).abs() <= 1e-9 * (1.0 + oracle));
    }

    #[test]
    fn disk_triangle(a in in_disk(0.999), b in in_disk(0.999), c in in_disk(0.999)) {
        let [x, y, z] = [a, b, c].map(|p| DiskPoint::new(p).unwrap());
        prop_assert!(triangle_gap(&PoincareDisk, &x, &y, &z) <= 1e-9);
    }

    #[test]
    fn lp_triangle(p in 1.0..6.0f64, pts in prop::collection::vec(-10.0..10.0f64, 9)) {
        let s = Euclidean::new(3, p).unwrap();
        let (x, y, z) = (pts[0..3].to_vec(), pts[3..6].to_vec(), pts[6..9].to_vec());
        prop_assert!(triangle_gap(&s, &x, &y, &z) <= 1e-9);
    }

    #[test]
    fn cone_triangle(thompson in any::<bool>(), pts in prop::collection::vec(0.01..100.0f64, 9)) {
        let metric = if thompson { ConeMetric::Thompson } else { ConeMetric::Funk };
        let s = PositiveCone::new(3, metric).unwrap();
        let (x, y, z) = (pts[0..3].to_vec(), pts[3..6].to_vec(), pts[6..9].to_vec());
        prop_assert!(triangle_gap(&s, &x, &y, &z) <= 1e-9);
    }

    #[test]
    fn thurston_triangle(x in modulus(), y in modulus(), z in modulus()) {
        prop_assert!(triangle_gap(&TorusTeich, &x, &y, &z) <= 1e-9);
    }

    #[test]
    fn thurston_closed_form_is_the_top_eigenvalue(x in modulus(), y in modulus()) {
        let closed = thurston_dist(x, y, ThurstonMode::ClosedForm).unwrap().value;
        let oracle = thurston_by_eigen(x, y);
        prop_assert!((closed - oracle).abs() <= 1e-9 * (1.0 + oracle), "{closed} vs {oracle}");
    }

    #[test]
    fn enumeration_never_exceeds_the_closed_form(x in modulus(), y in modulus()) {
        let closed = thurston_dist(x, y, ThurstonMode::ClosedForm).unwrap().value;
        let listed = thurston_dist(x, y, ThurstonMode::Enumerate(8)).unwrap().value;
        prop_assert!(listed <= closed + 1e-12);
    }

    #[test]
    fn mobius_maps_are_isometries(alpha in in_disk(1.0), beta in in_disk(1.0), z in in_disk(0.95), w in in_disk(0.95)) {
        prop_assume!(alpha.norm() > beta.norm() + 0.05);
        let f = Mobius::new(alpha, beta).unwrap();
        let before = pseudo_hyperbolic(z, w);
        let after = pseudo_hyperbolic(f.apply_z(z), f.apply_z(w));
        prop_assert!((before - after).abs() <= 1e-9);
    }

    #[test]
    fn blaschke_products_contract(
        zeros in prop::collection::vec(in_disk(0.95), 1..=3),
        turn in 0.0..std::f64::consts::TAU,
        z in in_disk(0.95),
        w in in_disk(0.95),
    ) {
        let b = Blaschke::new(Complex64::from_polar(1.0, turn), zeros).unwrap();
        let before = pseudo_hyperbolic(z, w);
        let after = pseudo_hyperbolic(b.apply_z(z), b.apply_z(w));
        prop_assert!(after <= before + 1e-9, "{after} > {before}");
    }

    #[test]
    fn squaring_contracts(z in in_disk(0.95), w in in_disk(0.95)) {
        prop_assert!(pseudo_hyperbolic(z * z, w * w) <= pseudo_hyperbolic(z, w) + 1e-12);
    }

    #[test]
    fn linear_functional_is_homogeneous(
        v in prop::collection::vec(-1.0..1.0f64, 3),
        y in prop::collection::vec(-10.0..10.0f64, 3),
        t in 0.0..50.0f64,
    ) {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let v: Vec<f64> = v.iter().map(|c| c / norm).collect();
        let s = Euclidean::hilbert(3);
        let h = hilbert_functional(&s, Radius::Infinite, &v).unwrap();
        let ty: Vec<f64> = y.iter().map(|c| t * c).collect();
        let oracle = -(0..3).map(|i| y[i] * v[i]).sum::<f64>();
        prop_assert!((h.eval(&s, &y) - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        prop_assert!((h.eval(&s, &ty) - t * h.eval(&s, &y)).abs() <= 1e-9 * (1.0 + t));
    }

    #[test]
    fn hilbert_functionals_are_convex_and_lipschitz(
        r in 0.0..100.0f64,
        v in prop::collection::vec(-1.0..1.0f64, 3),
        y in prop::collection::vec(-10.0..10.0f64, 3),
        z in prop::collection::vec(-10.0..10.0f64, 3),
        lambda in 0.0..=1.0f64,
    ) {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let v: Vec<f64> = v.iter().map(|c| c / norm).collect();
        let s = Euclidean::hilbert(3);
        let h = hilbert_functional(&s, Radius::Finite(r), &v).unwrap();
        let mid: Vec<f64> = (0..3).map(|i| lambda * y[i] + (1.0 - lambda) * z[i]).collect();
        let (hy, hz) = (h.eval(&s, &y), h.eval(&s, &z));
        prop_assert!(h.eval(&s, &mid) <= lambda * hy + (1.0 - lambda) * hz + 1e-9);
        prop_assert!((hy - hz).abs() <= s.dist(&y, &z) + 1e-9);
        prop_assert!(h.eval(&s, &vec![0.0; 3]).abs() <= 1e-9);
    }

    #[test]
    fn choice_sequences_depend_only_on_the_seed(seed in any::<u64>(), w in 0.05..0.95f64) {
        let p = ChoiceProcess::Iid { weights: vec![w, 1.0 - w] };
        prop_assert_eq!(p.choices(seed, 500), p.clone().choices(seed, 500));
        let m = ChoiceProcess::Markov { transition: vec![vec![w, 1.0 - w], vec![0.5, 0.5]] };
        prop_assert_eq!(m.choices(seed, 500), m.clone().choices(seed, 500));
    }

    #[test]
    fn sampled_points_depend_only_on_the_seed(seed in any::<u64>()) {
        let a = sample_points(&PoincareDisk, 20, seed);
        let b = sample_points(&PoincareDisk, 20, seed);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x == y));
    }
}

#[test]
fn lyapunov_runs_repeat_bit_for_bit() {
    let mats = vec![
        DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]),
    ];
    let process = ChoiceProcess::Iid {
        weights: vec![0.5, 0.5],
    };
    let run = || {
        let driver = CocycleDriver::new(
            process.clone(),
            42,
            MatrixFamily::new(mats.clone()).unwrap(),
        )
        .unwrap();
        top_lyapunov(&driver, 5_000).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.exponent.to_bits(), b.exponent.to_bits());
    assert_eq!(a.sigma_hat.to_bits(), b.sigma_hat.to_bits());
    assert_eq!(a.checkpoints, b.checkpoints);
}

#[test]
fn disk_resolution_grows_near_the_boundary() {
    let inner = DiskPoint::new(Complex64::new(0.5, 0.0)).unwrap();
    let deep = DiskPoint::radial(Complex64::new(1.0, 0.0), 40.0);
    let o = PoincareDisk.base_point();
    assert!(PoincareDisk.dist_resolution(&o, &inner) < 1e-12);
    let d = PoincareDisk.dist(&o, &deep);
    assert!(
        (d - 40.0).abs() <= 1e-9 + PoincareDisk.dist_resolution(&o, &deep),
        "{d}"
    );
}
