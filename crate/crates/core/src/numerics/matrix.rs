//! Small dense square matrices over any [`Scalar`].

use super::dual::Scalar;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S = f64> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![S::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// Build from row-major entries; panics if the length is not a square.
    pub fn from_vec(n: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data has wrong length");
        Mat { n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), n);
                r.iter().map(|&v| S::from_f64(v))
            })
            .collect();
        Mat { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Mat<T> {
        Mat { n: self.n, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn lift<T: Scalar>(&self) -> Mat<T>
    where
        S: Into<f64>,
    {
        self.map(|v| T::from_f64(v.into()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: S) -> Self {
        Mat { n: self.n, data: self.data.iter().map(|&v| v * c).collect() }
    }

    pub fn trace(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Frobenius norm of the real part.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.value() * v.value()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry of the real part.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, v.value().abs()))
    }

    /// Gauss-Jordan inverse with partial pivoting on the real part.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| {
                a[(i, col)].value().abs().total_cmp(&a[(j, col)].value().abs())
            })?;
            if a[(pivot, col)].value().abs() < 1e-300 {
                return None;
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                    inv.data.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[(col, col)];
            for k in 0..n {
                a[(col, k)] = a[(col, k)] / p;
                inv[(col, k)] = inv[(col, k)] / p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[(row, col)];
                if f.value() == 0.0 && f == S::zero() {
                    continue;
                }
                for k in 0..n {
                    let ak = a[(col, k)];
                    let ik = inv[(col, k)];
                    a[(row, k)] -= f * ak;
                    inv[(row, k)] -= f * ik;
                }
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> S {
        let n = self.n;
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].value().abs().total_cmp(&a[(j, col)].value().abs()))
                .unwrap_or(col);
            if a[(pivot, col)].value() == 0.0 {
                return S::zero();
            }
            if pivot != col {
                for k in 0..n {
                    a.data.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for row in col + 1..n {
                let f = a[(row, col)] / p;
                for k in col..n {
                    let v = a[(col, k)];
                    a[(row, k)] -= f * v;
                }
            }
        }
        det
    }

    /// Matrix exponential by scaling and squaring of a Taylor polynomial.
    pub fn expm(&self) -> Self {
        let norm = self.norm();
        let mut squarings = 0;
        let mut s = 1.0;
        while norm * s > 0.25 {
            s *= 0.5;
            squarings += 1;
        }
        let a = self.scale(S::from_f64(s));
        let mut term = Self::identity(self.n);
        let mut sum = Self::identity(self.n);
        for k in 1..=18 {
            term = (&term * &a).scale(S::from_f64(1.0 / k as f64));
            sum = &sum + &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    /// Principal logarithm via the Gregory series in `(A − I)(A + I)^{-1}`.
    /// Returns `None` when the series parameter is not contractive enough.
    pub fn logm(&self) -> Option<Self> {
        let n = self.n;
        let id = Self::identity(n);
        // Take square roots until close to the identity.
        let mut a = self.clone();
        let mut halvings = 0;
        while (&a - &id).norm() > 0.2 {
            a = a.sqrtm()?;
            halvings += 1;
            if halvings > 40 {
                return None;
            }
        }
        let z = &(&a - &id) * &(&a + &id).inverse()?;
        if z.norm() >= 0.9 {
            return None;
        }
        let z2 = &z * &z;
        let mut term = z.clone();
        let mut sum = z.clone();
        for k in 1..40 {
            term = &term * &z2;
            sum = &sum + &term.scale(S::from_f64(1.0 / (2 * k + 1) as f64));
        }
        Some(sum.scale(S::from_f64(2.0 * f64::powi(2.0, halvings))))
    }

    /// Principal square root by the Denman-Beavers iteration.
    pub fn sqrtm(&self) -> Option<Self> {
        let mut y = self.clone();
        let mut z = Self::identity(self.n);
        for _ in 0..60 {
            let yi = y.inverse()?;
            let zi = z.inverse()?;
            let ny = (&y + &zi).scale(S::from_f64(0.5));
            let nz = (&z + &yi).scale(S::from_f64(0.5));
            let delta = (&ny - &y).norm();
            y = ny;
            z = nz;
            if delta < 1e-15 * (1.0 + y.norm()) {
                return Some(y);
            }
        }
        Some(y)
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.n + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.n + j]
    }
}

impl<S: Scalar> Mul for &Mat<S> {
    type Output = Mat<S>;
    fn mul(self, o: &Mat<S>) -> Mat<S> {
        let n = self.n;
        assert_eq!(n, o.n, "matrix dimension mismatch");
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<S: Scalar> Add for &Mat<S> {
    type Output = Mat<S>;
    fn add(self, o: &Mat<S>) -> Mat<S> {
        Mat { n: self.n, data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect() }
    }
}

impl<S: Scalar> Sub for &Mat<S> {
    type Output = Mat<S>;
    fn sub(self, o: &Mat<S>) -> Mat<S> {
        Mat { n: self.n, data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect() }
    }
}

impl<S: Scalar> Neg for &Mat<S> {
    type Output = Mat<S>;
    fn neg(self) -> Mat<S> {
        Mat { n: self.n, data: self.data.iter().map(|&a| -a).collect() }
    }
}

/// Lift a real matrix to any scalar type.
pub fn lift_mat<S: Scalar>(m: &Mat<f64>) -> Mat<S> {
    m.map(S::from_f64)
}

/// Real part of a matrix.
pub fn real_part<S: Scalar>(m: &Mat<S>) -> Mat<f64> {
    m.map(|v| v.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat {
        Mat::from_rows(&[&[0.3, -0.8, 0.1], &[0.5, 0.2, -0.4], &[0.0, 0.7, 0.9]])
    }

    #[test]
    fn inverse_roundtrip() {
        let a = sample();
        let b = &a * &a.inverse().unwrap();
        assert!((&b - &Mat::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn expm_of_diagonal() {
        let d: Mat = Mat::from_rows(&[&[1.0, 0.0], &[0.0, -2.0]]);
        let e = d.expm();
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn logm_inverts_expm() {
        let a = sample().scale(0.5);
        let l = a.expm().logm().unwrap();
        assert!((&l - &a).max_abs() < 1e-12);
    }

    #[test]
    fn determinant_of_exp_is_exp_trace() {
        let a = sample();
        assert!((a.expm().determinant() - a.trace().exp()).abs() < 1e-12);
    }
}
