//! Samples of periodic functions on a uniform grid of the torus, with
//! trigonometric interpolation that can be evaluated on dual numbers.

use super::dual::Scalar;
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

pub const DEFAULT_GRID: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGridFunction {
    dims: usize,
    n: usize,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

/// Grid points of the `dims`-torus with `n` points per axis, last axis fastest.
pub fn torus_grid(dims: usize, n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; dims];
            for d in (0..dims).rev() {
                p[d] = TAU * (idx % n) as f64 / n as f64;
                idx /= n;
            }
            p
        })
        .collect()
}

impl PeriodicGridFunction {
    /// Build from samples at [`torus_grid`] points.
    pub fn from_samples(dims: usize, n: usize, samples: Vec<f64>) -> Result<Self> {
        if n < 2 || samples.len() != n.pow(dims as u32) {
            return Err(Error::Precondition(format!(
                "grid needs n ≥ 2 and n^d samples, got n = {n}, {} samples",
                samples.len()
            )));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let stride_of = |d: usize| n.pow((dims - 1 - d) as u32);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for d in 0..dims {
            let stride = stride_of(d);
            let total = data.len();
            for start in 0..total {
                if (start / stride) % n != 0 {
                    continue;
                }
                for k in 0..n {
                    line[k] = data[start + k * stride];
                }
                fft.process(&mut line);
                for k in 0..n {
                    data[start + k * stride] = line[k];
                }
            }
        }
        let norm = 1.0 / samples.len() as f64;
        for c in &mut data {
            *c *= norm;
        }
        Ok(PeriodicGridFunction { dims, n, samples, coeffs: data })
    }

    /// Sample a function on the grid.
    pub fn from_fn(dims: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let samples = torus_grid(dims, n).iter().map(|p| f(p)).collect();
        Self::from_samples(dims, n, samples)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Frequencies per axis with their weights; the Nyquist mode is split evenly.
    fn modes(&self) -> Vec<(i64, f64)> {
        let n = self.n as i64;
        let half = n / 2;
        (-half..=half)
            .map(|k| (k, if n % 2 == 0 && k.abs() == half { 0.5 } else { 1.0 }))
            .collect()
    }

    /// Evaluate the trigonometric interpolant at `x`.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        assert_eq!(x.len(), self.dims, "point has wrong dimension");
        let modes = self.modes();
        // e^{ikx} per axis and mode as (re, im).
        let basis: Vec<Vec<(S, S)>> = x
            .iter()
            .map(|&xd| {
                let (c1, s1) = (xd.cos(), xd.sin());
                let half = (self.n / 2) as i64;
                let mut pos = vec![(S::one(), S::zero())];
                for _ in 0..half {
                    let (c, s) = *pos.last().unwrap();
                    pos.push((c * c1 - s * s1, s * c1 + c * s1));
                }
                modes
                    .iter()
                    .map(|&(k, _)| {
                        let (c, s) = pos[k.unsigned_abs() as usize];
                        if k < 0 {
                            (c, -s)
                        } else {
                            (c, s)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut total = S::zero();
        let m = modes.len();
        let count = m.pow(self.dims as u32);
        for idx in 0..count {
            let mut rem = idx;
            let mut flat = 0usize;
            let mut weight = 1.0;
            let (mut re, mut im) = (S::one(), S::zero());
            for d in 0..self.dims {
                let j = rem % m;
                rem /= m;
                let (k, w) = modes[j];
                weight *= w;
                let kk = k.rem_euclid(self.n as i64) as usize;
                flat = flat * self.n + kk;
                let (br, bi) = basis[d][j];
                let nr = re * br - im * bi;
                im = re * bi + im * br;
                re = nr;
            }
            let c = self.coeffs[flat];
            total += (re.scale(c.re) - im.scale(c.im)).scale(weight);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dual::{derivative, Dual};

    #[test]
    fn interpolates_trig_polynomial_exactly() {
        let f = |x: f64| 0.3 + x.sin() - 0.2 * (3.0 * x).cos() + 0.05 * (7.0 * x).sin();
        let g = PeriodicGridFunction::from_fn(1, 32, |p| f(p[0])).unwrap();
        for k in 0..20 {
            let x = 0.31 * k as f64;
            assert!((g.eval(&[x]) - f(x)).abs() < 1e-13);
            let d = derivative(|t| g.eval(&[t]), x);
            let expect = x.cos() + 0.6 * (3.0 * x).sin() + 0.35 * (7.0 * x).cos();
            assert!((d - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn reproduces_samples() {
        let g = PeriodicGridFunction::from_fn(1, 16, |p| (p[0].cos() * 2.0).exp()).unwrap();
        for (p, s) in torus_grid(1, 16).iter().zip(g.samples()) {
            assert!((g.eval(&[p[0]]) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional() {
        let f = |x: f64, y: f64| (x + 2.0 * y).sin() + x.cos() * y.cos();
        let g = PeriodicGridFunction::from_fn(2, 12, |p| f(p[0], p[1])).unwrap();
        let v = g.eval(&[Dual::variable(0.7), Dual::constant(1.9)]);
        assert!((v.value - f(0.7, 1.9)).abs() < 1e-13);
        assert!((v.deriv - ((0.7f64 + 3.8).cos() - 0.7f64.sin() * 1.9f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGridFunction::from_samples(1, 8, vec![0.0; 7]).is_err());
    }
}
