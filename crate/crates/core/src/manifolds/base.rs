use crate::error::{Error, Result};
use crate::numerics::grid::torus_grid;
use crate::numerics::root::{wrap_pi, wrap_tau};
use crate::numerics::Scalar;
use rand::Rng;
use std::f64::consts::TAU;

/// Base manifolds of the groupoids: a point, a flat torus, or the tangent bundle
/// of a flat torus (bases of tangent groupoids).
///
/// Torus points are stored as angles in `[0, 2π)`; any lift is accepted as input.
/// `TangentTorus(d)` points are `[x (angles), v (reals)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseManifold {
    Point,
    Torus(usize),
    TangentTorus(usize),
}

impl BaseManifold {
    pub const CIRCLE: BaseManifold = BaseManifold::Torus(1);

    pub fn dim(&self) -> usize {
        match self {
            BaseManifold::Point => 0,
            BaseManifold::Torus(d) => *d,
            BaseManifold::TangentTorus(d) => 2 * d,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, BaseManifold::TangentTorus(_))
    }

    /// Base of the tangent groupoid.
    pub fn tangent(&self) -> Result<BaseManifold> {
        match self {
            BaseManifold::Point => Ok(BaseManifold::Point),
            BaseManifold::Torus(d) => Ok(BaseManifold::TangentTorus(*d)),
            BaseManifold::TangentTorus(_) => Err(Error::Precondition("second tangent bundles are not modelled".into())),
        }
    }

    /// Number of leading angular coordinates.
    pub fn angular_dim(&self) -> usize {
        match self {
            BaseManifold::Point => 0,
            BaseManifold::Torus(d) | BaseManifold::TangentTorus(d) => *d,
        }
    }

    /// Uniform angles; fibre coordinates of a tangent torus uniform in `[−1, 1]`.
    pub fn random_point(&self, rng: &mut (impl Rng + ?Sized)) -> Vec<f64> {
        let a = self.angular_dim();
        (0..self.dim()).map(|k| if k < a { rng.gen_range(0.0..TAU) } else { rng.gen_range(-1.0..1.0) }).collect()
    }

    /// Euclidean norm of the difference, wrapped on angular components.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.angular_dim();
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| if k < n { wrap_pi(x - y) } else { x - y }.powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Reduce angular coordinates to `[0, 2π)` by subtracting a constant multiple of 2π.
    pub fn wrap<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.angular_dim();
        x.iter()
            .enumerate()
            .map(|(k, &v)| if k < n { v.shift(wrap_tau(v.value()) - v.value()) } else { v })
            .collect()
    }

    /// Difference `q − p`, with angular components wrapped into `(−π, π]`.
    pub fn difference<S: Scalar>(&self, p: &[S], q: &[S]) -> Vec<S> {
        let n = self.angular_dim();
        p.iter()
            .zip(q)
            .enumerate()
            .map(|(k, (&a, &b))| {
                let d = b - a;
                if k < n {
                    d.shift(wrap_pi(d.value()) - d.value())
                } else {
                    d
                }
            })
            .collect()
    }

    /// Uniform grid with `n` points per axis; a single point for the point manifold.
    /// On a tangent torus, the grid of the zero section.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        match self {
            BaseManifold::Point => vec![vec![]],
            BaseManifold::Torus(d) => torus_grid(*d, n),
            BaseManifold::TangentTorus(d) => torus_grid(*d, n)
                .into_iter()
                .map(|mut x| {
                    x.extend(std::iter::repeat(0.0).take(*d));
                    x
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Dual;

    #[test]
    fn wrapping_keeps_derivative() {
        let t = BaseManifold::CIRCLE;
        let w = t.wrap(&[Dual::new(7.0, 2.0)]);
        assert!((w[0].value - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(w[0].deriv, 2.0);
        let d = t.difference(&[0.1], &[TAU - 0.1]);
        assert!((d[0] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn grids() {
        assert_eq!(BaseManifold::Point.grid(10), vec![Vec::<f64>::new()]);
        assert_eq!(BaseManifold::Torus(2).grid(4).len(), 16);
        assert!((BaseManifold::CIRCLE.distance(&[0.0], &[TAU - 0.5]) - 0.5).abs() < 1e-15);
    }
}
