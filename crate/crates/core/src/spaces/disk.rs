//! The Poincare disk with `ds = 2|dz| / (1 - |z|^2)`.
//!
//! Orbits of hyperbolic maps reach the unit circle in double precision after a
//! few dozen steps, so each point also carries `ln(1 - |z|^2)` and distances
//! are assembled in log scale from that depth and the direction of `z`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::RngCore;
use serde_json::{json, Value};

use crate::error::{domain, parameter, Error, Result};
use crate::functional::{FunctionalTag, MetricFunctional};
use crate::metric::{uniform_in_ball, Space};
use crate::spectral::semicontraction::{Boundary, Oracle, Semicontraction};

/// Directions closer than this are indistinguishable in double precision.
const DIRECTION_FLOOR: f64 = 4.0 * f64::EPSILON;
/// Absolute uncertainty assumed for the Euclidean gap `|z - w|` between
/// points whose coordinates carry accumulated rounding.
const GAP_ROUNDING: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    z: Complex64,
    /// `ln(1 - |z|^2)`; `-inf` on the unit circle.
    log_s: f64,
}

fn log1m_abs2(z: Complex64) -> f64 {
    let r = z.norm();
    (-r).ln_1p() + r.ln_1p()
}

/// `ln(e^a + e^b)`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(domain("disk point must be finite"));
        }
        if z.norm() >= 1.0 {
            return Err(domain(format!(
                "|z| = {} is not inside the unit disk",
                z.norm()
            )));
        }
        Ok(Self {
            z,
            log_s: log1m_abs2(z),
        })
    }

    pub const ORIGIN: DiskPoint = DiskPoint {
        z: Complex64 { re: 0.0, im: 0.0 },
        log_s: 0.0,
    };

    /// The point at hyperbolic distance `t` from 0 toward the unit complex `u`.
    pub fn radial(u: Complex64, t: f64) -> Self {
        let half = 0.5 * t;
        // 1 - tanh^2 = 1 / cosh^2
        let log_cosh = if half > 20.0 {
            half - LN_2 + (-2.0 * half).exp().ln_1p()
        } else {
            half.cosh().ln()
        };
        Self {
            z: u / u.norm() * half.tanh(),
            log_s: -2.0 * log_cosh,
        }
    }

    fn from_parts(z: Complex64, log_s: f64) -> Self {
        Self { z, log_s }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// `ln(1 - |z|^2)`.
    pub fn log_depth(&self) -> f64 {
        self.log_s
    }

    pub fn modulus(&self) -> f64 {
        if self.log_s > -0.5 {
            self.z.norm()
        } else {
            (-self.log_s.exp_m1()).sqrt()
        }
    }

    fn direction(&self) -> Option<Complex64> {
        let n = self.z.norm();
        (n > 0.0).then(|| self.z / n)
    }
}

/// `ln |z - w|^2` from depths and directions. Pass `log_s = -inf` for points
/// of the unit circle.
fn log_sep2(z: Complex64, ls_z: f64, w: Complex64, ls_w: f64) -> f64 {
    let (rz, rw) = (radius(z, ls_z), radius(w, ls_w));
    if rz == 0.0 || rw == 0.0 {
        return 2.0 * rz.max(rw).ln();
    }
    let (hi, lo) = if ls_z >= ls_w {
        (ls_z, ls_w)
    } else {
        (ls_w, ls_z)
    };
    // |r_z - r_w| = |s_w - s_z| / (r_z + r_w)
    let log_ds = if hi == lo {
        f64::NEG_INFINITY
    } else {
        hi + (-(lo - hi).exp_m1()).ln()
    };
    let radial = 2.0 * (log_ds - (rz + rw).ln());
    let gap = (z / rz - w / rw).norm();
    let angular = if gap <= DIRECTION_FLOOR {
        f64::NEG_INFINITY
    } else {
        (rz * rw).ln() + 2.0 * gap.ln()
    };
    log_add(radial, angular)
}

fn radius(z: Complex64, log_s: f64) -> f64 {
    if log_s > -0.5 {
        z.norm()
    } else {
        (-log_s.exp_m1()).sqrt()
    }
}

fn dist_points(a: &DiskPoint, b: &DiskPoint) -> f64 {
    // sinh(d/2) = |z - w| / sqrt((1-|z|^2)(1-|w|^2))
    let l = 0.5 * log_sep2(a.z, a.log_s, b.z, b.log_s) - 0.5 * (a.log_s + b.log_s);
    if l == f64::NEG_INFINITY {
        0.0
    } else if l > 30.0 {
        2.0 * (l + LN_2)
    } else {
        2.0 * l.exp().asinh()
    }
}

/// With `d = 2 asinh(g / sigma)`, `g = |z - w|` and `sigma^2 = s_z s_w`, an
/// error `e` in `g` moves `d` by at most `2 min(asinh(e / sigma), -ln(1 - e / g))`.
fn resolution_points(a: &DiskPoint, b: &DiskPoint) -> f64 {
    let sigma = (0.5 * (a.log_s + b.log_s)).exp();
    let near = (GAP_ROUNDING / sigma).asinh();
    let g = (0.5 * log_sep2(a.z, a.log_s, b.z, b.log_s)).exp();
    let far = if g > 2.0 * GAP_ROUNDING {
        -(-GAP_ROUNDING / g).ln_1p()
    } else {
        f64::INFINITY
    };
    2.0 * near.min(far)
}

/// `log(|zeta - z|^2 / (1 - |z|^2))`.
fn busemann_eval(zeta: Complex64, p: &DiskPoint) -> f64 {
    log_sep2(zeta, f64::NEG_INFINITY, p.z, p.log_s) - p.log_s
}

/// The Poincare disk, base point 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PoincareDisk;

impl Space for PoincareDisk {
    type Point = DiskPoint;

    fn name(&self) -> String {
        "poincare-disk".into()
    }

    fn base_point(&self) -> DiskPoint {
        DiskPoint::ORIGIN
    }

    fn dist_resolution(&self, x: &DiskPoint, y: &DiskPoint) -> f64 {
        resolution_points(x, y)
    }

    fn dist(&self, x: &DiskPoint, y: &DiskPoint) -> f64 {
        dist_points(x, y)
    }

    fn validate(&self, x: &DiskPoint) -> Result<()> {
        if !(x.z.re.is_finite() && x.z.im.is_finite()) || x.log_s.is_nan() || x.log_s > 0.0 {
            return Err(domain("malformed disk point"));
        }
        if x.log_s == f64::NEG_INFINITY {
            return Err(domain("point lies on the unit circle"));
        }
        Ok(())
    }

    /// `{"z": [re, im], "log1m_abs2": ln(1 - |z|^2)}`; a bare `[re, im]` is
    /// also accepted on input.
    fn point_to_json(&self, x: &DiskPoint) -> Value {
        json!({ "z": [x.z.re, x.z.im], "log1m_abs2": x.log_s })
    }

    fn point_from_json(&self, value: &Value) -> Result<DiskPoint> {
        let pair = |v: &Value| -> Result<Complex64> {
            let a = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| domain("expected [re, im]"))?;
            let re = a[0].as_f64().ok_or_else(|| domain("expected a number"))?;
            let im = a[1].as_f64().ok_or_else(|| domain("expected a number"))?;
            Ok(Complex64::new(re, im))
        };
        match value {
            Value::Array(_) => DiskPoint::new(pair(value)?),
            Value::Object(map) => {
                let z = pair(map.get("z").ok_or_else(|| domain("missing 'z'"))?)?;
                let ls = map
                    .get("log1m_abs2")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| domain("missing 'log1m_abs2'"))?;
                let p = DiskPoint::from_parts(z, ls);
                self.validate(&p)?;
                if z.norm() > 1.0 || (ls > -0.5 && (ls - log1m_abs2(z)).abs() > 1e-9) {
                    return Err(domain("'z' and 'log1m_abs2' disagree"));
                }
                Ok(p)
            }
            _ => Err(domain("expected a disk point")),
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> DiskPoint {
        let v = uniform_in_ball(rng, 2, 0.95);
        DiskPoint::new(Complex64::new(v[0], v[1])).expect("sample inside the disk")
    }

    fn eval_closed_form(&self, tag: &FunctionalTag<DiskPoint>, y: &DiskPoint) -> Option<f64> {
        match tag {
            FunctionalTag::DiskBusemann { zeta } => Some(busemann_eval(*zeta, y)),
            _ => None,
        }
    }

    fn check_closed_form(&self, tag: &FunctionalTag<DiskPoint>) -> Result<()> {
        match tag {
            FunctionalTag::DiskBusemann { zeta } => {
                if (zeta.norm() - 1.0).abs() > 1e-12 {
                    return Err(parameter(format!("|zeta| must be 1, got {}", zeta.norm())));
                }
                Ok(())
            }
            other => Err(Error::Unsupported(format!(
                "the disk has no '{}' functional",
                other.kind_name()
            ))),
        }
    }

    /// Deep anchors approximate the Busemann function of their direction.
    fn boundary_match(&self, anchor: &DiskPoint) -> Option<FunctionalTag<DiskPoint>> {
        anchor
            .direction()
            .map(|u| FunctionalTag::DiskBusemann { zeta: u })
    }
}

/// `2 artanh |(z - w) / (1 - conj(z) w)|`.
pub fn disk_distance(z: Complex64, w: Complex64) -> Result<f64> {
    Ok(dist_points(&DiskPoint::new(z)?, &DiskPoint::new(w)?))
}

/// `h_zeta(z) = log(|zeta - z|^2 / (1 - |z|^2))` for `|zeta| = 1`.
pub fn disk_busemann(zeta: Complex64) -> Result<MetricFunctional<PoincareDisk>> {
    MetricFunctional::new(&PoincareDisk, FunctionalTag::DiskBusemann { zeta })
}

/// Unit-speed geodesic ray from 0 toward `zeta`.
pub fn geodesic_ray(zeta: Complex64) -> Result<crate::functional::Ray<PoincareDisk>> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(parameter("ray direction must be a unit complex number"));
    }
    Ok(crate::functional::Ray::new(
        &PoincareDisk,
        move |t| DiskPoint::radial(zeta, t),
        1e-9,
    ))
}

/// Isometry type of a disk automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobiusKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// A disk automorphism `z -> (alpha z + beta) / (conj(beta) z + conj(alpha))`
/// with `|alpha| > |beta|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Mobius {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if !(alpha.norm() > beta.norm()) {
            return Err(parameter("need |alpha| > |beta| for a disk automorphism"));
        }
        Ok(Self { alpha, beta })
    }

    /// Accepts any complex multiple of a matrix `[[alpha, beta], [conj(beta), conj(alpha)]]`.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = m;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        let tol = 1e-12 * scale;
        if !(a.norm() > 0.0)
            || (a.norm() - d.norm()).abs() > tol
            || (c - d * b.conj() / a.conj()).norm() > tol
        {
            return Err(parameter("matrix is not a multiple of an SU(1,1) matrix"));
        }
        let lambda = (d / a.conj()).sqrt();
        Self::new(a / lambda, b / lambda)
    }

    pub fn rotation(theta: f64) -> Self {
        Self {
            alpha: Complex64::from_polar(1.0, 0.5 * theta),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    fn det(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    fn denom(&self, z: Complex64) -> Complex64 {
        self.beta.conj() * z + self.alpha.conj()
    }

    pub fn apply(&self, p: &DiskPoint) -> DiskPoint {
        let den = self.denom(p.z);
        let z = (self.alpha * p.z + self.beta) / den;
        // 1 - |f z|^2 = det (1 - |z|^2) / |den|^2
        let ls = self.det().ln() + p.log_s - den.norm_sqr().ln();
        DiskPoint::from_parts(z, ls.min(0.0))
    }

    pub fn apply_z(&self, z: Complex64) -> Complex64 {
        (self.alpha * z + self.beta) / self.denom(z)
    }

    pub fn inverse(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: -self.beta,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
    }

    /// `|Re alpha| / sqrt(det)`, the normalized half-trace.
    fn half_trace(&self) -> f64 {
        self.alpha.re.abs() / self.det().sqrt()
    }

    pub fn kind(&self) -> MobiusKind {
        let t = self.half_trace();
        if (t - 1.0).abs() <= 1e-12 && self.beta.norm() > 0.0 {
            MobiusKind::Parabolic
        } else if t > 1.0 {
            MobiusKind::Hyperbolic
        } else {
            MobiusKind::Elliptic
        }
    }

    /// `2 acosh(|Re alpha| / sqrt(det))`, zero unless hyperbolic.
    pub fn translation_length(&self) -> f64 {
        match self.kind() {
            MobiusKind::Hyperbolic => 2.0 * self.half_trace().acosh(),
            _ => 0.0,
        }
    }

    /// Roots of `conj(beta) z^2 + (conj(alpha) - alpha) z - beta = 0`.
    pub fn fixed_points(&self) -> Vec<Complex64> {
        if self.beta.norm() == 0.0 {
            return vec![Complex64::new(0.0, 0.0)];
        }
        let im = self.alpha.im;
        let disc = Complex64::new(self.beta.norm_sqr() - im * im, 0.0).sqrt();
        let i_im = Complex64::new(0.0, im);
        let bc = self.beta.conj();
        let roots = [(i_im + disc) / bc, (i_im - disc) / bc];
        if self.kind() == MobiusKind::Parabolic {
            vec![i_im / bc]
        } else {
            roots.to_vec()
        }
    }

    /// `|f'(z)| = det / |conj(beta) z + conj(alpha)|^2`.
    pub fn derivative_modulus(&self, z: Complex64) -> f64 {
        self.det() / self.denom(z).norm_sqr()
    }

    /// The Denjoy-Wolff point: the attracting boundary fixed point of a
    /// hyperbolic map, or the unique fixed point of a parabolic one.
    pub fn denjoy_wolff(&self) -> Option<Complex64> {
        match self.kind() {
            MobiusKind::Elliptic => None,
            MobiusKind::Parabolic => self.fixed_points().first().map(|z| z / z.norm()),
            MobiusKind::Hyperbolic => self
                .fixed_points()
                .into_iter()
                .find(|z| self.derivative_modulus(*z) < 1.0)
                .map(|z| z / z.norm()),
        }
    }

    fn interior_fixed_point(&self) -> Option<DiskPoint> {
        if self.kind() != MobiusKind::Elliptic {
            return None;
        }
        self.fixed_points()
            .into_iter()
            .find_map(|z| DiskPoint::new(z).ok())
    }

    pub fn into_map(self, label: impl Into<String>) -> Semicontraction<PoincareDisk> {
        let inv = self.inverse();
        let tau = self.translation_length();
        let kind = self.kind();
        let oracle = Oracle {
            tau: Some(tau),
            min_displacement: Some(tau),
            fixed_point: self.interior_fixed_point(),
            boundary: self.denjoy_wolff().map(Boundary::Disk),
            provenance: match kind {
                MobiusKind::Hyperbolic => {
                    "hyperbolic Mobius: translation length 2 acosh(|Re alpha|/sqrt(det))"
                }
                MobiusKind::Parabolic => "parabolic Mobius: no interior fixed point, zero drift",
                MobiusKind::Elliptic => "elliptic Mobius: interior fixed point",
            }
            .into(),
        };
        Semicontraction::new(label, move |p: &DiskPoint| self.apply(p))
            .with_inverse(move |p: &DiskPoint| inv.apply(p))
            .isometry()
            .with_oracle(oracle)
    }
}

/// Finite Blaschke product `rotation * prod_j (z - a_j) / (1 - conj(a_j) z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blaschke {
    rotation: Complex64,
    zeros: Vec<Complex64>,
}

impl Blaschke {
    pub fn new(rotation: Complex64, zeros: Vec<Complex64>) -> Result<Self> {
        if (rotation.norm() - 1.0).abs() > 1e-12 {
            return Err(parameter("rotation factor must have modulus 1"));
        }
        if zeros.is_empty() {
            return Err(parameter(
                "a Blaschke product needs at least one zero; use Mobius::rotation for rotations",
            ));
        }
        if zeros.iter().any(|a| !(a.norm() < 1.0)) {
            return Err(parameter("Blaschke zeros must lie inside the unit disk"));
        }
        Ok(Self { rotation, zeros })
    }

    /// `z -> rho B(conj(rho) z)`, whose Denjoy-Wolff point is rotated by `rho`.
    pub fn rotated(&self, rho: Complex64) -> Result<Self> {
        let deg = self.zeros.len() as i32;
        Self::new(
            self.rotation * rho * rho.conj().powi(deg),
            self.zeros.iter().map(|a| rho * a).collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn apply(&self, p: &DiskPoint) -> DiskPoint {
        let mut z = self.rotation;
        // the unimodular rotation has 1 - |z|^2 = 0
        let mut ls = f64::NEG_INFINITY;
        for a in &self.zeros {
            let den = Complex64::new(1.0, 0.0) - a.conj() * p.z;
            let w = (p.z - a) / den;
            let ls_w = (1.0 - a.norm_sqr()).ln() + p.log_s - den.norm_sqr().ln();
            // 1 - |uv|^2 = s_u + (1 - s_u) s_v
            let log_r2_acc = if ls == f64::NEG_INFINITY {
                0.0
            } else {
                2.0 * z.norm().ln()
            };
            ls = log_add(ls, log_r2_acc + ls_w);
            z *= w;
        }
        DiskPoint::from_parts(z, ls.min(0.0))
    }

    pub fn apply_z(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().fold(self.rotation, |acc, a| {
            acc * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
        })
    }

    /// `|B'(zeta)| = sum_j (1 - |a_j|^2) / |zeta - a_j|^2` at a unimodular point.
    pub fn angular_derivative(&self, zeta: Complex64) -> f64 {
        self.zeros
            .iter()
            .map(|a| (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr())
            .sum()
    }

    /// Wraps the product as a map with the declared Denjoy-Wolff point
    /// `zeta`, which must be a boundary fixed point with angular derivative
    /// below 1. The drift is `-ln |B'(zeta)|`.
    pub fn into_map(
        self,
        label: impl Into<String>,
        zeta: Complex64,
    ) -> Result<Semicontraction<PoincareDisk>> {
        if (zeta.norm() - 1.0).abs() > 1e-12 || (self.apply_z(zeta) - zeta).norm() > 1e-12 {
            return Err(Error::Precondition(
                "declared point is not a boundary fixed point".into(),
            ));
        }
        let c = self.angular_derivative(zeta);
        if !(c < 1.0) {
            return Err(Error::Precondition(format!(
                "angular derivative {c} at the declared point is not below 1"
            )));
        }
        let oracle = Oracle {
            tau: Some(-c.ln()),
            min_displacement: None,
            fixed_point: None,
            boundary: Some(Boundary::Disk(zeta)),
            provenance: "Blaschke product: angular derivative at the Denjoy-Wolff point".into(),
        };
        Ok(Semicontraction::new(label, move |p: &DiskPoint| self.apply(p)).with_oracle(oracle))
    }

    /// Wraps the product without drift oracle.
    pub fn into_plain_map(self, label: impl Into<String>) -> Semicontraction<PoincareDisk> {
        Semicontraction::new(label, move |p: &DiskPoint| self.apply(p))
    }
}
