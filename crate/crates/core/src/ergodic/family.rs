//! Finite families of maps whose random products define the cocycle
//! `Z_n(omega) = f_omega ∘ f_{T omega} ∘ ... ∘ f_{T^{n-1} omega}`.
//!
//! A family only needs to evaluate `a(m) = d(x0, Z_m x0)` along a given
//! choice sequence; `a(m, T^k omega)` is the same evaluation on the sequence
//! shifted by `k`.

use std::fmt::Debug;
use std::ops::Mul;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{parameter, Error, Result};
use crate::metric::Space;
use crate::spaces::operator::{left_multiplication, OperatorSpace};
use crate::spaces::torus::{
    check_mapping_class, gram_form, mapping_class_map, Curve, MappingClass, TorusTeich,
};
use crate::spectral::semicontraction::Semicontraction;

/// Steps between renormalizations of a running product.
pub const RENORMALIZE_EVERY: usize = 32;

pub trait CocycleFamily: Send + Sync {
    type Point: Clone + Debug + Send + Sync;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn x0(&self) -> Self::Point;

    /// `a(m) = d(x0, Z_m x0)` for `m = 0..=choices.len()`, where
    /// `Z_m = f_{c_0} ∘ ... ∘ f_{c_{m-1}}`.
    fn prefix(&self, choices: &[usize]) -> Result<Vec<f64>>;

    /// `a(m, T^k omega)` for `m = 0..=choices.len() - k`.
    fn shifted(&self, choices: &[usize], k: usize) -> Result<Vec<f64>> {
        self.prefix(&choices[k..])
    }
}

/// Any finite family of semicontractions of a space. Each `Z_m x0` is
/// recomposed from the innermost map outward, so `prefix` costs `O(m^2)`.
#[derive(Clone)]
pub struct PointFamily<S: Space> {
    pub space: S,
    pub maps: Vec<Semicontraction<S>>,
    pub x0: S::Point,
}

impl<S: Space> PointFamily<S> {
    pub fn new(space: S, maps: Vec<Semicontraction<S>>, x0: S::Point) -> Result<Self> {
        space.validate(&x0)?;
        Ok(Self { space, maps, x0 })
    }
}

impl<S: Space> Debug for PointFamily<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let labels: Vec<&str> = self.maps.iter().map(|m| m.label()).collect();
        f.debug_struct("PointFamily")
            .field("space", &self.space.name())
            .field("maps", &labels)
            .finish()
    }
}

impl<S: Space> CocycleFamily for PointFamily<S> {
    type Point = S::Point;

    fn len(&self) -> usize {
        self.maps.len()
    }

    fn x0(&self) -> S::Point {
        self.x0.clone()
    }

    fn prefix(&self, choices: &[usize]) -> Result<Vec<f64>> {
        let mut a = Vec::with_capacity(choices.len() + 1);
        a.push(self.space.dist(&self.x0, &self.x0));
        for m in 1..=choices.len() {
            let mut y = self.x0.clone();
            for &c in choices[..m].iter().rev() {
                y = self.maps[c].apply(&y);
            }
            self.space
                .validate(&y)
                .map_err(|e| Error::InvalidOrbitPoint {
                    step: m,
                    reason: e.to_string(),
                })?;
            a.push(self.space.dist(&self.x0, &y));
        }
        Ok(a)
    }
}

/// Square matrices that can be multiplied, rescaled and normed.
pub trait ProductMatrix: Clone + Send + Sync + for<'a> Mul<&'a Self, Output = Self> {
    fn max_abs(&self) -> f64;
    fn scale_mut(&mut self, s: f64);
    fn log_norm(&self) -> f64;
}

impl ProductMatrix for Matrix2<f64> {
    fn max_abs(&self) -> f64 {
        self.amax()
    }

    fn scale_mut(&mut self, s: f64) {
        *self *= s;
    }

    /// `ln sigma_max` from the trace and determinant of `M^t M`.
    fn log_norm(&self) -> f64 {
        let f = self.norm_squared();
        let det = self.determinant();
        let disc = (f * f - 4.0 * det * det).max(0.0);
        0.5 * ((f + disc.sqrt()) / 2.0).ln()
    }
}

impl ProductMatrix for DMatrix<f64> {
    fn max_abs(&self) -> f64 {
        self.amax()
    }

    fn scale_mut(&mut self, s: f64) {
        *self *= s;
    }

    fn log_norm(&self) -> f64 {
        self.singular_values().max().ln()
    }
}

/// `ln |x|` split as `log2_carry * ln 2 + ln |scaled x|`; rescaling by powers
/// of two is exact.
fn renormalize<M: ProductMatrix>(m: &mut M, carry: &mut i64) {
    let e = m.max_abs().log2().floor() as i32;
    if e != 0 {
        m.scale_mut(2f64.powi(-e));
        *carry += e as i64;
    }
}

/// `ln ||M_{c_0} ... M_{c_{m-1}}||` for `m = 0..=choices.len()`.
pub fn log_norms<M: ProductMatrix>(mats: &[M], identity: &M, choices: &[usize]) -> Vec<f64> {
    let mut p = identity.clone();
    let mut carry = 0i64;
    let mut out = Vec::with_capacity(choices.len() + 1);
    out.push(p.log_norm());
    for (k, &c) in choices.iter().enumerate() {
        p = p * &mats[c];
        if (k + 1) % RENORMALIZE_EVERY == 0 {
            renormalize(&mut p, &mut carry);
        }
        out.push(p.log_norm() + carry as f64 * std::f64::consts::LN_2);
    }
    out
}

#[derive(Debug, Clone)]
enum Mats {
    Two(Vec<Matrix2<f64>>),
    General(Vec<DMatrix<f64>>),
}

impl Mats {
    fn new(mats: &[DMatrix<f64>]) -> Self {
        if mats[0].nrows() == 2 {
            Mats::Two(
                mats.iter()
                    .map(|m| Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
                    .collect(),
            )
        } else {
            Mats::General(mats.to_vec())
        }
    }

    fn log_norms(&self, choices: &[usize]) -> Vec<f64> {
        match self {
            Mats::Two(m) => log_norms(m, &Matrix2::identity(), choices),
            Mats::General(m) => {
                let n = m[0].nrows();
                log_norms(m, &DMatrix::identity(n, n), choices)
            }
        }
    }
}

/// Left multiplications `B -> A_j B` on the operator space, based at `I`.
/// Here `a(m) = ln ||A_{c_0} ... A_{c_{m-1}}||`.
#[derive(Debug, Clone)]
pub struct MatrixFamily {
    pub space: OperatorSpace,
    pub matrices: Vec<DMatrix<f64>>,
    mats: Mats,
}

impl MatrixFamily {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| parameter("map family is empty"))?;
        let space = OperatorSpace::new(first.nrows())?;
        for m in &matrices {
            if m.shape() != first.shape() {
                return Err(parameter("family matrices have different sizes"));
            }
            left_multiplication(&space, m)?;
        }
        let mats = Mats::new(&matrices);
        Ok(Self {
            space,
            matrices,
            mats,
        })
    }

    pub fn semicontractions(&self) -> Result<Vec<Semicontraction<OperatorSpace>>> {
        self.matrices
            .iter()
            .map(|m| left_multiplication(&self.space, m))
            .collect()
    }
}

impl CocycleFamily for MatrixFamily {
    type Point = DMatrix<f64>;

    fn len(&self) -> usize {
        self.matrices.len()
    }

    fn x0(&self) -> DMatrix<f64> {
        let n = self.space.dim();
        DMatrix::identity(n, n)
    }

    fn prefix(&self, choices: &[usize]) -> Result<Vec<f64>> {
        Ok(self.mats.log_norms(choices))
    }
}

/// Mapping classes acting on the torus Teichmuller space from the modulus
/// `x0`. With `Q_0 = R R^t` the Gram form of `x0` and `P = M_{c_0} ... M_{c_{m-1}}`,
/// `Z_m x0` has Gram form `P Q_0 P^t`, so `a(m) = ln sigma_max(R^{-1} P R)` and
/// `l_{Z_m x0}(alpha) = |R^t P^t alpha|`.
#[derive(Debug, Clone)]
pub struct MappingClassFamily {
    pub classes: Vec<MappingClass>,
    pub x0: Complex64,
    r: Matrix2<f64>,
    conjugated: Vec<Matrix2<f64>>,
}

impl MappingClassFamily {
    pub fn new(classes: Vec<MappingClass>, x0: Complex64) -> Result<Self> {
        if classes.is_empty() {
            return Err(parameter("map family is empty"));
        }
        TorusTeich.validate(&x0)?;
        for m in &classes {
            check_mapping_class(m)?;
        }
        let r = gram_form(x0)
            .cholesky()
            .expect("Gram form is positive definite")
            .l();
        let r_inv = r.try_inverse().expect("Cholesky factor is invertible");
        let conjugated = classes
            .iter()
            .map(|m| r_inv * crate::spaces::torus::as_matrix(m) * r)
            .collect();
        Ok(Self {
            classes,
            x0,
            r,
            conjugated,
        })
    }

    /// Based at `tau = i`.
    pub fn at_base(classes: Vec<MappingClass>) -> Result<Self> {
        Self::new(classes, TorusTeich.base_point())
    }

    pub fn semicontractions(&self) -> Result<Vec<Semicontraction<TorusTeich>>> {
        self.classes.iter().map(mapping_class_map).collect()
    }

    /// `ln l_{Z_k x0}(alpha)` for `k = 0..=choices.len()`.
    pub fn log_lengths(&self, choices: &[usize], alpha: Curve) -> Vec<f64> {
        let mut u = self.r.transpose() * Vector2::new(alpha.p as f64, alpha.q as f64);
        let mut carry = 0i64;
        let mut out = Vec::with_capacity(choices.len() + 1);
        out.push(u.norm().ln());
        for (k, &c) in choices.iter().enumerate() {
            u = self.conjugated[c].transpose() * u;
            if (k + 1) % RENORMALIZE_EVERY == 0 {
                let e = u.amax().log2().floor() as i32;
                u *= 2f64.powi(-e);
                carry += e as i64;
            }
            out.push(u.norm().ln() + carry as f64 * std::f64::consts::LN_2);
        }
        out
    }
}

impl CocycleFamily for MappingClassFamily {
    type Point = Complex64;

    fn len(&self) -> usize {
        self.classes.len()
    }

    fn x0(&self) -> Complex64 {
        self.x0
    }

    fn prefix(&self, choices: &[usize]) -> Result<Vec<f64>> {
        Ok(log_norms(&self.conjugated, &Matrix2::identity(), choices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::euclidean::{translation, Euclidean};
    use crate::spaces::torus::{act_on_modulus, thurston_dist, torus_length, ThurstonMode};

    #[test]
    fn point_family_composes_innermost_last() {
        // x -> 2x and x -> x + 1 on the line: Z_2 = f_0 ∘ f_1
        let s = Euclidean::hilbert(1);
        let double = Semicontraction::<Euclidean>::new("double", |x: &Vec<f64>| vec![2.0 * x[0]]);
        let shift = translation(&s, &[1.0]).unwrap();
        let fam = PointFamily::new(s, vec![double, shift], vec![0.0]).unwrap();
        assert_eq!(fam.prefix(&[0, 1]).unwrap(), vec![0.0, 0.0, 2.0]);
        assert_eq!(fam.prefix(&[1, 0]).unwrap(), vec![0.0, 1.0, 1.0]);
        assert_eq!(fam.shifted(&[0, 1, 0], 1).unwrap(), vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn renormalized_products_match_direct_products() {
        let a = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.9]);
        let b = DMatrix::from_row_slice(2, 2, &[0.7, -1.1, 0.5, 1.6]);
        let fam = MatrixFamily::new(vec![a.clone(), b.clone()]).unwrap();
        let choices: Vec<usize> = (0..70).map(|k| (k * 7 % 3 == 0) as usize).collect();
        let a_n = fam.prefix(&choices).unwrap();
        let space = fam.space.clone();
        let mut p = DMatrix::identity(2, 2);
        for (k, &c) in choices.iter().enumerate() {
            p *= &fam.matrices[c];
            let direct = space.dist(&fam.x0(), &p);
            assert!(
                (a_n[k + 1] - direct).abs() < 1e-10 * (1.0 + direct.abs()),
                "step {k}"
            );
        }
    }

    #[test]
    fn general_dimension_path() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 0.5]));
        let fam = MatrixFamily::new(vec![d]).unwrap();
        let a = fam.prefix(&vec![0; 2000]).unwrap();
        assert!((a[2000] - 2000.0 * 2f64.ln()).abs() < 1e-9);
        assert!(
            MatrixFamily::new(vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0])]).is_err()
        );
        assert!(MatrixFamily::new(vec![]).is_err());
    }

    #[test]
    fn torus_cocycle_matches_thurston_distance() {
        let classes = vec![[[1, 1], [0, 1]], [[1, 0], [1, 1]], [[0, -1], [1, 0]]];
        for x0 in [Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.7)] {
            let fam = MappingClassFamily::new(classes.clone(), x0).unwrap();
            let choices = [0, 1, 1, 2, 0, 0, 1, 2, 1, 0];
            let a = fam.prefix(&choices).unwrap();
            let alpha = Curve::new(2, -1).unwrap();
            let lengths = fam.log_lengths(&choices, alpha);
            for m in 0..=choices.len() {
                // Z_m x0 = M_{c_0} . ... . M_{c_{m-1}} . x0
                let mut y = x0;
                for &c in choices[..m].iter().rev() {
                    y = act_on_modulus(&classes[c], y);
                }
                let l = thurston_dist(x0, y, ThurstonMode::ClosedForm)
                    .unwrap()
                    .value;
                assert!((a[m] - l).abs() < 1e-9, "m = {m}: {} vs {l}", a[m]);
                let direct = torus_length(y, alpha).unwrap().ln();
                assert!((lengths[m] - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn anosov_lengths_do_not_overflow() {
        let fam = MappingClassFamily::at_base(vec![[[2, 1], [1, 1]]]).unwrap();
        let l = fam.log_lengths(&vec![0; 5000], Curve::new(1, 0).unwrap());
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(l.iter().all(|x| x.is_finite()));
        assert!((l[5000] / 5000.0 - phi2.ln()).abs() < 1e-4);
    }
}
