//! Forward-mode automatic differentiation.
//!
//! [`Scalar`] abstracts over `f64` and [`Dual`] numbers so that every
//! structure map in the crate can be evaluated on jets. Nesting
//! `Dual<Dual<f64>>` gives exact second derivatives.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Numeric type usable in all structure maps.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_f64(v: f64) -> Self;
    /// The real part, discarding all infinitesimals.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn scale(self, c: f64) -> Self {
        self * Self::from_f64(c)
    }
    fn shift(self, c: f64) -> Self {
        self + Self::from_f64(c)
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::one() / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// A dual number `value + deriv·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual<T = f64> {
    pub value: T,
    pub deriv: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, deriv: T) -> Self {
        Dual { value, deriv }
    }

    /// A constant (zero derivative).
    pub fn constant(value: T) -> Self {
        Dual { value, deriv: T::zero() }
    }

    /// The independent variable at `value` (unit derivative).
    pub fn variable(value: T) -> Self {
        Dual { value, deriv: T::one() }
    }

    fn chain(self, f: T, df: T) -> Self {
        Dual { value: f, deriv: df * self.deriv }
    }
}

/// Seed a point with a tangent direction: `x + ε·v` componentwise.
pub fn seed<T: Scalar>(x: &[T], v: &[T]) -> Vec<Dual<T>> {
    x.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect()
}

/// Lift a point to dual numbers with zero tangent.
pub fn constants<T: Scalar>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().map(|&a| Dual::constant(a)).collect()
}

/// Split a dual vector into values and derivatives.
pub fn split<T: Scalar>(x: &[Dual<T>]) -> (Vec<T>, Vec<T>) {
    (x.iter().map(|d| d.value).collect(), x.iter().map(|d| d.deriv).collect())
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.value + o.value, self.deriv + o.deriv)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.value - o.value, self.deriv - o.deriv)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.value * o.value, self.deriv * o.value + self.value * o.deriv)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.value / o.value;
        Dual::new(q, (self.deriv - q * o.deriv) / o.value)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.value, -self.deriv)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.value.value()
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), T::one() / self.value)
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, T::one() / (r + r))
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.value * self.value + x.value * x.value;
        Dual::new(
            self.value.atan2(x.value),
            (x.value * self.deriv - self.value * x.deriv) / r2,
        )
    }
    fn scale(self, c: f64) -> Self {
        Dual::new(self.value.scale(c), self.deriv.scale(c))
    }
    fn shift(self, c: f64) -> Self {
        Dual::new(self.value.shift(c), self.deriv)
    }
}

/// Derivative of a scalar function of one variable.
pub fn derivative(f: impl Fn(Dual<f64>) -> Dual<f64>, x: f64) -> f64 {
    f(Dual::variable(x)).deriv
}

/// Second derivative via nested duals.
pub fn second_derivative(f: impl Fn(Dual<Dual<f64>>) -> Dual<Dual<f64>>, x: f64) -> f64 {
    let v = Dual::new(Dual::variable(x), Dual::constant(1.0));
    f(v).deriv.deriv
}

/// Jacobian (row-major, `m × n`) of a vector map at `x`, one forward pass per column.
pub fn jacobian(f: impl Fn(&[Dual<f64>]) -> Vec<Dual<f64>>, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut dir = vec![0.0; n];
        dir[k] = 1.0;
        cols.push(split(&f(&seed(x, &dir))).1);
    }
    let m = cols.first().map_or(0, Vec::len);
    (0..m).map(|i| (0..n).map(|k| cols[k][i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sin_cos_exp() {
        let x = 0.7_f64;
        let d = derivative(|t| t.sin() * t.exp(), x);
        assert!((d - (x.cos() * x.exp() + x.sin() * x.exp())).abs() < 1e-15);
        let d = derivative(|t| t.cos() / (t * t).shift(1.0), x);
        let expect = (-x.sin() * (1.0 + x * x) - x.cos() * 2.0 * x) / (1.0 + x * x).powi(2);
        assert!((d - expect).abs() < 1e-15);
    }

    #[test]
    fn nested_second_derivative() {
        let x = 0.3_f64;
        let d2 = second_derivative(|t| t.sin() * t, x);
        assert!((d2 - (2.0 * x.cos() - x * x.sin())).abs() < 1e-14);
        let d2 = second_derivative(|t| t.sqrt().ln(), x);
        assert!((d2 + 0.5 / (x * x)).abs() < 1e-12);
    }

    #[test]
    fn atan2_derivative_matches_fd() {
        let f = |t: Dual<f64>| t.sin().atan2(t.cos().shift(2.0));
        let h = 1e-6;
        let fd = (f(Dual::constant(0.4 + h)).value - f(Dual::constant(0.4 - h)).value) / (2.0 * h);
        assert!((derivative(f, 0.4) - fd).abs() < 1e-9);
    }

    #[test]
    fn powi_negative() {
        let d = derivative(|t| t.powi(-2), 2.0);
        assert!((d + 2.0 / 8.0).abs() < 1e-15);
    }
}
