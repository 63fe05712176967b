//! Fixed-step classical Runge-Kutta integration.

use super::dual::Scalar;
use crate::error::{Error, Result};

/// Default number of RK4 steps.
pub const DEFAULT_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationParams {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl IntegrationParams {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Self {
        IntegrationParams { t0, t1, steps }
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t0 + k as f64 * self.dt()).collect()
    }
}

fn axpy<S: Scalar>(x: &[S], a: f64, k: &[S]) -> Vec<S> {
    x.iter().zip(k).map(|(&xi, &ki)| xi + ki.scale(a)).collect()
}

fn finite<S: Scalar>(x: &[S]) -> bool {
    x.iter().all(|v| v.value().is_finite())
}

/// One RK4 step from `(t, x)` with step `dt` (negative steps integrate backward).
pub fn rk4_step<S: Scalar>(
    rhs: &mut impl FnMut(f64, &[S]) -> Result<Vec<S>>,
    t: f64,
    x: &[S],
    dt: f64,
) -> Result<Vec<S>> {
    let k1 = rhs(t, x)?;
    let k2 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k1))?;
    let k3 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k2))?;
    let k4 = rhs(t + dt, &axpy(x, dt, &k3))?;
    Ok((0..x.len())
        .map(|i| x[i] + (k1[i] + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i]).scale(dt / 6.0))
        .collect())
}

/// Integrate `x' = rhs(t, x)` and return the states at every step, starting with `x0`.
pub fn rk4_solve<S: Scalar>(
    mut rhs: impl FnMut(f64, &[S]) -> Result<Vec<S>>,
    x0: &[S],
    params: IntegrationParams,
) -> Result<Vec<Vec<S>>> {
    if params.steps == 0 || !params.dt().is_finite() {
        return Err(Error::InvalidStep(params.dt()));
    }
    let dt = params.dt();
    let mut path = Vec::with_capacity(params.steps + 1);
    path.push(x0.to_vec());
    for step in 0..params.steps {
        let t = params.t0 + step as f64 * dt;
        let next = match rk4_step(&mut rhs, t, &path[step], dt) {
            Ok(x) => x,
            Err(Error::IntegrationDiverged { .. }) => return Err(Error::IntegrationDiverged { step }),
            Err(e) => return Err(e),
        };
        if !finite(&next) {
            return Err(Error::IntegrationDiverged { step });
        }
        path.push(next);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let path = rk4_solve(|_, x: &[f64]| Ok(vec![x[0]]), &[1.0], IntegrationParams::new(0.0, 1.0, 200)).unwrap();
        let h: f64 = 1.0 / 200.0;
        let exact_rk4 = (1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0).powi(200);
        assert!((path[200][0] - exact_rk4).abs() < 1e-12);
        assert!((path[200][0] - 1f64.exp()).abs() < 2e-11);
    }

    #[test]
    fn backward_integration() {
        let p = IntegrationParams::new(1.0, 0.0, 100);
        let path = rk4_solve(|t, _x: &[f64]| Ok(vec![2.0 * t]), &[1.0], p).unwrap();
        assert!(path[100][0].abs() < 1e-13);
    }

    #[test]
    fn fourth_order() {
        let err = |n| {
            let p = IntegrationParams::new(0.0, 2.0, n);
            let path = rk4_solve(|_, x: &[f64]| Ok(vec![x[1], -x[0]]), &[0.0, 1.0], p).unwrap();
            (path[n][0] - 2f64.sin()).abs()
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn divergence_reports_step() {
        let p = IntegrationParams::new(0.0, 1.0, 50);
        let e = rk4_solve(|_, x: &[f64]| Ok(vec![x[0] * x[0]]), &[1e6], p).unwrap_err();
        assert!(matches!(e, Error::IntegrationDiverged { .. }));
    }

    #[test]
    fn zero_steps_rejected() {
        let p = IntegrationParams::new(0.0, 1.0, 0);
        assert!(rk4_solve(|_, x: &[f64]| Ok(x.to_vec()), &[1.0], p).is_err());
    }
}
