//! The pair groupoid `M × M ⇉ M` of a torus.

use super::{Arrow, Groupoid, Point, Side, COMPOSE_TOL};
use crate::error::{Error, Result};
use crate::manifolds::BaseManifold;
use crate::numerics::Scalar;
use rand::{Rng, RngCore};

/// Arrows `(y, x)` from `x` to `y`; coordinates are `[y…, x…]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGroupoid {
    base: BaseManifold,
}

impl PairGroupoid {
    pub fn new(base: BaseManifold) -> Self {
        PairGroupoid { base }
    }

    pub fn circle() -> Self {
        PairGroupoid { base: BaseManifold::CIRCLE }
    }

    fn d(&self) -> usize {
        self.base.dim()
    }

    /// The arrow from `x` to `y`.
    pub fn arrow<S: Scalar>(&self, y: &[S], x: &[S]) -> Arrow<S> {
        let mut c = self.base.wrap(y);
        c.extend(self.base.wrap(x));
        Point::global(c)
    }
}

impl Groupoid for PairGroupoid {
    fn name(&self) -> String {
        format!("Pair(T^{})", self.d())
    }

    fn base(&self) -> BaseManifold {
        self.base
    }

    fn coord_dim(&self) -> usize {
        2 * self.d()
    }

    fn arrow_dim(&self) -> usize {
        2 * self.d()
    }

    fn source<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        self.base.wrap(&g.coords[self.d()..])
    }

    fn target<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        self.base.wrap(&g.coords[..self.d()])
    }

    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S> {
        self.arrow(x, x)
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S> {
        let d = self.d();
        self.arrow(&g.coords[d..], &g.coords[..d])
    }

    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>> {
        let d = self.d();
        let sg: Vec<f64> = g.coords[d..].iter().map(|c| c.value()).collect();
        let th: Vec<f64> = h.coords[..d].iter().map(|c| c.value()).collect();
        if self.base.distance(&sg, &th) > COMPOSE_TOL {
            return Err(Error::NotComposable { source_point: sg, target_point: th });
        }
        Ok(self.arrow(&g.coords[..d], &h.coords[d..]))
    }

    fn distance(&self, g: &Arrow, h: &Arrow) -> f64 {
        let d = self.d();
        let y = self.base.distance(&g.coords[..d], &h.coords[..d]);
        let x = self.base.distance(&g.coords[d..], &h.coords[d..]);
        y.hypot(x)
    }

    fn tangent_basis<S: Scalar>(&self, _g: &Arrow<S>) -> Vec<Vec<S>> {
        let n = self.coord_dim();
        (0..n).map(|k| (0..n).map(|i| if i == k { S::one() } else { S::zero() }).collect()).collect()
    }

    fn vertical_basis(&self, g: &Arrow, side: Side) -> Vec<Vec<f64>> {
        let d = self.d();
        let keep = |k: usize| match side {
            Side::Source => k < d,
            Side::Target => k >= d,
        };
        self.tangent_basis(g).into_iter().enumerate().filter(|(k, _)| keep(*k)).map(|(_, v)| v).collect()
    }

    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        let pl: Vec<S> = p.coords.iter().map(|&c| S::from_f64(c)).collect();
        let d = self.d();
        let mut out = self.base.difference(&pl[..d], &q.coords[..d]);
        out.extend(self.base.difference(&pl[d..], &q.coords[d..]));
        Ok(out)
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow {
        let x = self.base.random_point(rng);
        self.arrow(y, &x)
    }

    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, _g: &Arrow, dy: &[f64]) -> Vec<f64> {
        let mut v = dy.to_vec();
        v.extend((0..self.d()).map(|_| rng.gen_range(-1.0..1.0)));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_slots_wrap() {
        let g = PairGroupoid::circle();
        let p = g.arrow(&[0.0], &[6.283185307179585]);
        let q = g.arrow(&[0.0], &[0.0]);
        assert!(g.difference(&p, &q).unwrap().iter().all(|d| d.abs() < 1e-14));
        assert!(g.distance(&p, &q) < 1e-14);
    }

    #[test]
    fn composition_forgets_the_middle() {
        let p = PairGroupoid::circle();
        let g = p.arrow(&[1.0], &[2.0]);
        let h = p.arrow(&[2.0], &[3.0]);
        let gh = p.compose(&g, &h).unwrap();
        assert_eq!(gh.coords, vec![1.0, 3.0]);
        assert!(p.compose(&h, &g).is_err());
        assert_eq!(p.source(&gh), vec![3.0]);
        assert_eq!(p.target(&gh), vec![1.0]);
    }
}
