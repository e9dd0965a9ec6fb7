//! Teichmuller space of unit-area flat tori, parametrized by the modulus `tau`
//! in the upper half-plane, with Thurston's length-ratio metric.
//!
//! A primitive pair `(p, q)` is the curve class `p + q tau`; its length is
//! `|p + q tau| / sqrt(Im tau)`, and squared lengths are the quadratic form
//! `Q_tau = (1 / Im tau) [[1, Re tau], [Re tau, |tau|^2]]`, which has
//! determinant 1.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{domain, parameter, Result};
use crate::metric::Space;
use crate::spectral::semicontraction::Semicontraction;

/// A primitive integer pair. Ordering is lexicographic in `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Curve {
    pub p: i64,
    pub q: i64,
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

impl Curve {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(parameter(format!("({p}, {q}) is not a primitive pair")));
        }
        Ok(Self { p, q })
    }
}

impl std::fmt::Display for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

fn check_modulus(tau: Complex64) -> Result<()> {
    if !(tau.re.is_finite() && tau.im.is_finite() && tau.im > 0.0) {
        return Err(domain(format!(
            "modulus {tau} is not in the upper half-plane"
        )));
    }
    Ok(())
}

/// `|p + q tau| / sqrt(Im tau)`.
pub fn torus_length(tau: Complex64, alpha: Curve) -> Result<f64> {
    check_modulus(tau)?;
    Curve::new(alpha.p, alpha.q)?;
    Ok(raw_length(tau, alpha.p as f64, alpha.q as f64))
}

fn raw_length(tau: Complex64, p: f64, q: f64) -> f64 {
    (Complex64::new(p, 0.0) + tau * q).norm() / tau.im.sqrt()
}

/// The unit-determinant Gram form of the length function.
pub fn gram_form(tau: Complex64) -> Matrix2<f64> {
    let y = tau.im;
    Matrix2::new(1.0 / y, tau.re / y, tau.re / y, tau.norm_sqr() / y)
}

/// The modulus whose Gram form is `q` (positive definite, determinant 1).
pub fn modulus_from_gram(q: &Matrix2<f64>) -> Complex64 {
    let a = q[(0, 0)];
    Complex64::new(q[(0, 1)] / a, 1.0 / a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThurstonMode {
    /// Maximum over primitive pairs with `|p|, |q| <= N`.
    Enumerate(u32),
    /// `1/2 ln lambda_max(Q_x^{-1} Q_y)`.
    ClosedForm,
}

/// Value of `L(x, y)` and, in enumeration mode, the maximizing curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThurstonValue {
    pub value: f64,
    pub argmax: Option<Curve>,
}

/// Primitive pairs with `|p|, |q| <= n`, one per `+-` class, in lexicographic order.
pub fn primitive_pairs(n: u32) -> Vec<Curve> {
    let n = n as i64;
    let mut out = Vec::new();
    for p in -n..=n {
        for q in 0..=n {
            if (q > 0 || p > 0) && gcd(p, q) == 1 {
                out.push(Curve { p, q });
            }
        }
    }
    out
}

fn closed_form(x: Complex64, y: Complex64) -> f64 {
    // Q_x^{-1} Q_y has determinant 1 and trace 2 + s with
    // s = |x - y|^2 / (Im x Im y), so its top eigenvalue needs no cancellation
    let s = (x - y).norm_sqr() / (x.im * y.im);
    0.5 * (0.5 * s + (s + 0.25 * s * s).sqrt()).ln_1p()
}

/// Thurston's metric `L(x, y) = ln sup_alpha l_y(alpha) / l_x(alpha)`.
/// Enumeration ties go to the lexicographically smallest pair.
pub fn thurston_dist(x: Complex64, y: Complex64, mode: ThurstonMode) -> Result<ThurstonValue> {
    check_modulus(x)?;
    check_modulus(y)?;
    match mode {
        ThurstonMode::ClosedForm => Ok(ThurstonValue {
            value: closed_form(x, y),
            argmax: None,
        }),
        ThurstonMode::Enumerate(0) => Err(parameter("enumeration bound must be at least 1")),
        ThurstonMode::Enumerate(n) => {
            let mut best = (f64::NEG_INFINITY, None);
            for c in primitive_pairs(n) {
                let (p, q) = (c.p as f64, c.q as f64);
                let r = (raw_length(y, p, q) / raw_length(x, p, q)).ln();
                if r > best.0 {
                    best = (r, Some(c));
                }
            }
            Ok(ThurstonValue {
                value: best.0,
                argmax: best.1,
            })
        }
    }
}

/// Integer matrix with determinant `+-1`, a mapping class of the torus.
pub type MappingClass = [[i64; 2]; 2];

pub fn check_mapping_class(m: &MappingClass) -> Result<()> {
    let det = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
    if det.abs() != 1 {
        return Err(parameter(format!(
            "mapping class needs |det| = 1, got det = {det}"
        )));
    }
    Ok(())
}

/// `M alpha`.
pub fn mapclass_act(m: &MappingClass, alpha: Curve) -> Result<Curve> {
    check_mapping_class(m)?;
    Curve::new(alpha.p, alpha.q)?;
    let p = m[0][0]
        .checked_mul(alpha.p)
        .zip(m[0][1].checked_mul(alpha.q))
        .and_then(|(a, b)| a.checked_add(b));
    let q = m[1][0]
        .checked_mul(alpha.p)
        .zip(m[1][1].checked_mul(alpha.q))
        .and_then(|(a, b)| a.checked_add(b));
    match (p, q) {
        (Some(p), Some(q)) => Ok(Curve { p, q }),
        _ => Err(parameter("image curve overflows 64-bit coordinates")),
    }
}

pub fn as_matrix(m: &MappingClass) -> Matrix2<f64> {
    Matrix2::new(
        m[0][0] as f64,
        m[0][1] as f64,
        m[1][0] as f64,
        m[1][1] as f64,
    )
}

/// Action of a mapping class on moduli: `Q -> M Q M^t`, so that
/// `l_{M x}(alpha) = l_x(M^t alpha)`.
pub fn act_on_modulus(m: &MappingClass, tau: Complex64) -> Complex64 {
    let mm = as_matrix(m);
    modulus_from_gram(&(mm * gram_form(tau) * mm.transpose()))
}

/// The flat-torus Teichmuller space with base point `tau = i`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TorusTeich;

impl Space for TorusTeich {
    type Point = Complex64;

    fn name(&self) -> String {
        "torus-teichmuller".into()
    }

    fn base_point(&self) -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    fn dist(&self, x: &Complex64, y: &Complex64) -> f64 {
        closed_form(*x, *y)
    }

    fn validate(&self, x: &Complex64) -> Result<()> {
        check_modulus(*x)
    }

    /// Moduli are `[re, im]`.
    fn point_to_json(&self, x: &Complex64) -> Value {
        Value::from(vec![x.re, x.im])
    }

    fn point_from_json(&self, value: &Value) -> Result<Complex64> {
        let v = crate::spaces::euclidean::json_vector(value)?;
        if v.len() != 2 {
            return Err(domain("expected [re, im]"));
        }
        let tau = Complex64::new(v[0], v[1]);
        check_modulus(tau)?;
        Ok(tau)
    }

    /// Uniform in `|Re tau| <= 1`, `1/2 <= Im tau <= 2`.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Complex64 {
        Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(0.5..=2.0))
    }
}

/// The isometry of Teichmuller space induced by a mapping class.
pub fn mapping_class_map(m: &MappingClass) -> Result<Semicontraction<TorusTeich>> {
    check_mapping_class(m)?;
    let fwd = *m;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [
        [det * m[1][1], -det * m[0][1]],
        [-det * m[1][0], det * m[0][0]],
    ];
    Ok(
        Semicontraction::new(format!("mapping-class({m:?})"), move |tau: &Complex64| {
            act_on_modulus(&fwd, *tau)
        })
        .with_inverse(move |tau: &Complex64| act_on_modulus(&inv, *tau))
        .isometry(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{check_triangle, sample_points};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn length_examples() {
        let i = c(0.0, 1.0);
        assert_eq!(torus_length(i, Curve::new(1, 0).unwrap()).unwrap(), 1.0);
        assert!((torus_length(i, Curve::new(1, 1).unwrap()).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(
            (torus_length(c(0.0, 2.0), Curve::new(0, 1).unwrap()).unwrap() - 2f64.sqrt()).abs()
                < 1e-15
        );
        assert!(Curve::new(2, 4).is_err());
        assert!(Curve::new(0, 0).is_err());
        assert!(torus_length(c(0.0, -1.0), Curve { p: 1, q: 0 }).is_err());
    }

    #[test]
    fn thurston_examples() {
        let i = c(0.0, 1.0);
        assert_eq!(
            thurston_dist(i, i, ThurstonMode::ClosedForm).unwrap().value,
            0.0
        );
        let cf = thurston_dist(i, c(0.0, 2.0), ThurstonMode::ClosedForm)
            .unwrap()
            .value;
        assert!((cf - 0.5 * 2f64.ln()).abs() < 1e-12);
        let en = thurston_dist(i, c(0.0, 2.0), ThurstonMode::Enumerate(50)).unwrap();
        assert!((en.value - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(en.argmax, Some(Curve { p: 0, q: 1 }));
    }

    #[test]
    fn thurston_is_half_hyperbolic_distance() {
        let pts = sample_points(&TorusTeich, 100, 3);
        for w in pts.windows(2) {
            let (x, y) = (w[0], w[1]);
            let half_hyp = ((x - y).norm() / (2.0 * (x.im * y.im).sqrt())).asinh();
            assert!((TorusTeich.dist(&x, &y) - half_hyp).abs() < 1e-9);
            assert!((TorusTeich.dist(&x, &y) - TorusTeich.dist(&y, &x)).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_increases_to_closed_form() {
        let pts = sample_points(&TorusTeich, 20, 4);
        for w in pts.windows(2) {
            let cf = thurston_dist(w[0], w[1], ThurstonMode::ClosedForm)
                .unwrap()
                .value;
            let mut prev = f64::NEG_INFINITY;
            for n in [1, 2, 4, 8, 16, 32] {
                let v = thurston_dist(w[0], w[1], ThurstonMode::Enumerate(n))
                    .unwrap()
                    .value;
                assert!(v >= prev && v <= cf + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn mapclass_examples() {
        let id = [[1, 0], [0, 1]];
        assert_eq!(
            mapclass_act(&id, Curve::new(3, 2).unwrap()).unwrap(),
            Curve { p: 3, q: 2 }
        );
        let cat = [[2, 1], [1, 1]];
        assert_eq!(
            mapclass_act(&cat, Curve::new(1, 0).unwrap()).unwrap(),
            Curve { p: 2, q: 1 }
        );
        assert!(mapclass_act(&[[2, 0], [0, 1]], Curve::new(1, 0).unwrap()).is_err());
    }

    #[test]
    fn mapping_classes_are_isometries() {
        assert!(check_triangle(&TorusTeich, 1000, 1, 1e-9).passed);
        for m in [
            [[2, 1], [1, 1]],
            [[0, -1], [1, 0]],
            [[1, 1], [0, 1]],
            [[0, 1], [1, 0]],
        ] {
            let f = mapping_class_map(&m).unwrap();
            let pts = sample_points(&TorusTeich, 100, 6);
            for w in pts.windows(2) {
                let d0 = TorusTeich.dist(&w[0], &w[1]);
                let d1 = TorusTeich.dist(&f.apply(&w[0]), &f.apply(&w[1]));
                assert!((d0 - d1).abs() < 1e-8 * (1.0 + d0));
                assert!((f.apply_inverse(&f.apply(&w[0])).unwrap() - w[0]).norm() < 1e-9);
            }
            let tau = c(0.3, 1.4);
            let alpha = Curve::new(2, 3).unwrap();
            let mt = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
            let lhs = torus_length(act_on_modulus(&m, tau), alpha).unwrap();
            let rhs = torus_length(tau, mapclass_act(&mt, alpha).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * lhs);
        }
    }
}
