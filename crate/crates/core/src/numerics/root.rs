//! Newton iterations: inversion of circle diffeomorphisms and square systems.

use super::dual::{seed, split, Dual};
use super::matrix::Mat;
use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Derivative threshold below which a lift is treated as non-monotone.
pub const MONOTONE_EPS: f64 = 1e-8;

/// Wrap an angle difference into `(−π, π]`.
pub fn wrap_pi(d: f64) -> f64 {
    let r = (d + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Solve `f(x) ≡ y (mod 2π)` for an orientation-preserving circle diffeomorphism.
///
/// `f` may return any lift of its value. The result lies in `[0, 2π)`.
pub fn invert_circle_diffeo(
    f: impl Fn(Dual<f64>) -> Dual<f64>,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let y = wrap_tau(y);
    let mut x = y - wrap_pi(f(Dual::constant(y)).value - y);
    for _ in 0..max_iter {
        let fx = f(Dual::variable(x));
        let r = wrap_pi(fx.value - y);
        if fx.deriv <= MONOTONE_EPS || !fx.deriv.is_finite() {
            break;
        }
        let step = r / fx.deriv;
        if step.abs() > 1.0 {
            break;
        }
        x -= step;
        if r.abs() < tol {
            return Ok(wrap_tau(x));
        }
    }
    invert_by_bisection(&f, y, tol)
}

fn invert_by_bisection(f: &impl Fn(Dual<f64>) -> Dual<f64>, y: f64, tol: f64) -> Result<f64> {
    const N: usize = 256;
    let val = |x: f64| f(Dual::constant(x)).value;
    let mut lift = Vec::with_capacity(N + 1);
    lift.push(val(0.0));
    for k in 1..=N {
        let x = TAU * k as f64 / N as f64;
        let prev = lift[k - 1];
        let inc = wrap_pi(val(x) - prev);
        if inc <= 0.0 {
            return Err(Error::NotADiffeomorphism(format!("lift decreases near x = {x:.6}")));
        }
        lift.push(prev + inc);
    }
    if (lift[N] - lift[0] - TAU).abs() > 1e-6 {
        return Err(Error::NotADiffeomorphism(format!(
            "degree {} instead of 1",
            (lift[N] - lift[0]) / TAU
        )));
    }
    let target = lift[0] + (y - lift[0]).rem_euclid(TAU);
    let k = lift.partition_point(|&l| l <= target).saturating_sub(1).min(N - 1);
    let (mut lo, mut hi) = (TAU * k as f64 / N as f64, TAU * (k + 1) as f64 / N as f64);
    let base = lift[k];
    let lifted = |x: f64| base + wrap_pi(val(x) - base);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lifted(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    let r = wrap_pi(val(x) - y);
    if r.abs() > tol.max(1e-13) {
        return Err(Error::NewtonDiverged { iterations: 200, residual: r.abs() });
    }
    Ok(wrap_tau(x))
}

/// Solve the linear system `a x = b`.
pub fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let m = Mat::from_vec(n, a.iter().flatten().copied().collect());
    let inv = m.inverse()?;
    Some((0..n).map(|i| (0..n).map(|j| inv[(i, j)] * b[j]).sum()).collect())
}

/// Basis of the null space of the `rows × cols` matrix `a` (row-major rows), by
/// Gauss-Jordan elimination with partial pivoting. Vectors are returned unnormalised.
pub fn null_space(a: &[Vec<f64>], cols: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= m.len() {
            break;
        }
        let (best, val) = (row..m.len()).map(|r| (r, m[r][col].abs())).fold((row, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if val <= tol {
            continue;
        }
        m.swap(row, best);
        let p = m[row][col];
        for v in m[row].iter_mut() {
            *v /= p;
        }
        for r in 0..m.len() {
            if r != row {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..cols {
                        m[r][c] -= f * m[row][c];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0.0; cols];
            v[free] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][free];
            }
            v
        })
        .collect()
}

/// Newton's method for a square system `F(x) = 0` with dual-number Jacobians.
pub fn newton_solve(
    f: impl Fn(&[Dual<f64>]) -> Result<Vec<Dual<f64>>>,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut last = f64::INFINITY;
    for it in 0..max_iter {
        let mut jac = vec![vec![0.0; n]; n];
        let mut value = Vec::new();
        for k in 0..n {
            let mut dir = vec![0.0; n];
            dir[k] = 1.0;
            let (v, d) = split(&f(&seed(&x, &dir))?);
            if v.len() != n {
                return Err(Error::Precondition("newton_solve needs a square system".into()));
            }
            for i in 0..n {
                jac[i][k] = d[i];
            }
            value = v;
        }
        let res = value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !res.is_finite() {
            return Err(Error::NewtonDiverged { iterations: it, residual: res });
        }
        let step = solve_linear(&jac, &value).ok_or(Error::NewtonDiverged { iterations: it, residual: res })?;
        for i in 0..n {
            x[i] -= step[i];
        }
        if res < tol {
            return Ok(x);
        }
        last = res;
    }
    Err(Error::NewtonDiverged { iterations: max_iter, residual: last })
}

#[cfg(test)]
mod tests {
    #[test]
    fn null_space_of_rank_one() {
        let k = super::null_space(&[vec![1.0, 2.0, 3.0]], 3, 1e-12);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((v[0] + 2.0 * v[1] + 3.0 * v[2]).abs() < 1e-15);
        }
    }

    use super::*;
    use crate::numerics::dual::Scalar;

    #[test]
    fn wraps() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_tau(-0.5) - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn inverts_fourier_diffeo() {
        let f = |x: Dual<f64>| x + x.sin().scale(0.4) + (x.scale(2.0)).cos().scale(0.1);
        for k in 0..50 {
            let y = k as f64 * 0.13;
            let x = invert_circle_diffeo(f, y, NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
            assert!(wrap_pi(f(Dual::constant(x)).value - y).abs() < 1e-12);
        }
    }

    #[test]
    fn inverts_large_rotation() {
        let f = |x: Dual<f64>| x.shift(3.0);
        let x = invert_circle_diffeo(f, 0.5, NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
        assert!((x - wrap_tau(0.5 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn steep_map_uses_fallback() {
        // Nearly degenerate derivative near x = π.
        let f = |x: Dual<f64>| x + x.sin().scale(0.999_999);
        let x = invert_circle_diffeo(f, PI + 1e-3, NEWTON_TOL, NEWTON_MAX_ITER).unwrap();
        assert!(wrap_pi(f(Dual::constant(x)).value - PI - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone() {
        let f = |x: Dual<f64>| x + x.sin().scale(1.5);
        let r = invert_circle_diffeo(f, 2.9, NEWTON_TOL, 0);
        assert!(matches!(r, Err(Error::NotADiffeomorphism(_))), "{r:?}");
    }

    #[test]
    fn newton_system() {
        let f = |x: &[Dual<f64>]| Ok(vec![x[0] * x[0] + x[1] - Dual::from_f64(3.0), x[0] - x[1] * x[1] + Dual::from_f64(3.0)]);
        let x = newton_solve(f, &[1.2, 1.7], 1e-13, 30).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
