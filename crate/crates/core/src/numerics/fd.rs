//! Central finite differences, used as independent oracles for dual-number derivatives.

use crate::error::{Error, Result};

/// Central difference `(f(x + h v) − f(x − h v)) / 2h`.
pub fn fd_derivative(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    v: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    Ok(f(&plus).iter().zip(f(&minus)).map(|(p, m)| (p - m) / (2.0 * h)).collect())
}

/// Scalar central difference.
pub fn fd_scalar(f: impl Fn(f64) -> f64, x: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep(h));
    }
    Ok((f(x + h) - f(x - h)) / (2.0 * h))
}

/// Mixed central difference `∂²F/∂s∂t` at the origin from the four corner values
/// `F(h,h), F(h,−h), F(−h,h), F(−h,−h)`.
pub fn mixed_difference(pp: &[f64], pm: &[f64], mp: &[f64], mm: &[f64], h: f64) -> Vec<f64> {
    (0..pp.len()).map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_second_order() {
        let f = |x: &[f64]| vec![x[0].sin() * x[1]];
        let err = |h| (fd_derivative(f, &[0.4, 2.0], &[1.0, 0.0], h).unwrap()[0] - 2.0 * 0.4f64.cos()).abs();
        let r = err(1e-2) / err(5e-3);
        assert!((r - 4.0).abs() < 0.05, "ratio {r}");
    }

    #[test]
    fn rejects_bad_step() {
        assert!(fd_scalar(|x| x, 0.0, 0.0).is_err());
        assert!(fd_scalar(|x| x, 0.0, -1.0).is_err());
    }

    #[test]
    fn mixed_difference_of_product() {
        let f = |s: f64, t: f64| vec![s * t + s * s + t.powi(3)];
        let h = 0.1;
        let d = mixed_difference(&f(h, h), &f(h, -h), &f(-h, h), &f(-h, -h), h);
        assert!((d[0] - 1.0).abs() < 1e-12);
    }
}
