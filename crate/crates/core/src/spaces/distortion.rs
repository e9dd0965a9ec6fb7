use crate::error::{domain, parameter, Result};

/// Grid estimates of `K(g; I) = sup_{x, y in I} |ln(g'(x) / g'(y))|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    /// On `n` equally spaced points.
    pub coarse: f64,
    /// On the grid with half the spacing (`2n - 1` points), which contains the coarse grid.
    pub fine: f64,
}

fn on_grid(deriv: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let x = if i + 1 == n {
            b
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        };
        let d = deriv(x);
        if !(d.is_finite() && d > 0.0) {
            return Err(domain(format!("derivative {d} at x = {x} is not positive")));
        }
        let l = d.ln();
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok(hi - lo)
}

/// Distortion coefficient of a map with positive derivative `deriv` on `[a, b]`.
pub fn distortion_coeff(
    deriv: impl Fn(f64) -> f64,
    interval: (f64, f64),
    n: usize,
) -> Result<Distortion> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(parameter("interval must be finite with a < b"));
    }
    if n < 2 {
        return Err(parameter("grid needs at least 2 points"));
    }
    Ok(Distortion {
        coarse: on_grid(&deriv, a, b, n)?,
        fine: on_grid(&deriv, a, b, 2 * n - 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let k = distortion_coeff(|_| 2.0, (-3.0, 5.0), 10).unwrap();
        assert_eq!(k.coarse, 0.0);
        assert_eq!(k.fine, 0.0);
        let sq = distortion_coeff(|x| 2.0 * x, (1.0, 2.0), 7).unwrap();
        assert!((sq.coarse - 2f64.ln()).abs() < 1e-15);
        let sqrt = distortion_coeff(|y: f64| 0.5 / y.sqrt(), (1.0, 4.0), 7).unwrap();
        assert!((sq.fine - sqrt.fine).abs() < 1e-15);
    }

    #[test]
    fn refinement_does_not_decrease() {
        let g = |x: f64| 1.0 + 0.5 * (3.0 * x).sin();
        for n in [2, 3, 5, 17, 40] {
            let k = distortion_coeff(g, (0.0, 2.0), n).unwrap();
            assert!(k.fine >= k.coarse);
        }
    }

    #[test]
    fn rejects_bad_derivative() {
        assert!(distortion_coeff(|x| x, (-1.0, 1.0), 5).is_err());
        assert!(distortion_coeff(|x| x, (1.0, 1.0), 5).is_err());
        assert!(distortion_coeff(|x| x, (1.0, 2.0), 1).is_err());
    }
}
