//! A matrix Lie group viewed as a groupoid over a point.

use super::{Arrow, Groupoid, Point, Side};
use crate::error::Result;
use crate::manifolds::{BaseManifold, MatrixGroup};
use crate::numerics::{Mat, Scalar};
use rand::RngCore;

/// Arrows are group elements stored as row-major matrix entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupOverPoint {
    group: MatrixGroup,
}

impl GroupOverPoint {
    pub fn new(group: MatrixGroup) -> Self {
        GroupOverPoint { group }
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.group
    }

    pub fn matrix<S: Scalar>(&self, g: &Arrow<S>) -> Mat<S> {
        Mat::from_vec(self.group.n(), g.coords.clone())
    }

    pub fn arrow<S: Scalar>(&self, m: &Mat<S>) -> Arrow<S> {
        Point::global(m.as_slice().to_vec())
    }
}

impl Groupoid for GroupOverPoint {
    fn name(&self) -> String {
        format!("Group({})", self.group.name())
    }

    fn base(&self) -> BaseManifold {
        BaseManifold::Point
    }

    fn coord_dim(&self) -> usize {
        self.group.n() * self.group.n()
    }

    fn arrow_dim(&self) -> usize {
        self.group.algebra_dim()
    }

    fn source<S: Scalar>(&self, _g: &Arrow<S>) -> Vec<S> {
        vec![]
    }

    fn target<S: Scalar>(&self, _g: &Arrow<S>) -> Vec<S> {
        vec![]
    }

    fn unit<S: Scalar>(&self, _x: &[S]) -> Arrow<S> {
        self.arrow(&self.group.identity())
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S> {
        self.arrow(&self.group.inverse(&self.matrix(g)))
    }

    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>> {
        Ok(self.arrow(&(&self.matrix(g) * &self.matrix(h))))
    }

    fn distance(&self, g: &Arrow, h: &Arrow) -> f64 {
        self.group.distance(&self.matrix(g), &self.matrix(h))
    }

    /// Left-translated algebra basis `g E_k`.
    fn tangent_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>> {
        let m = self.matrix(g);
        self.group.algebra_basis().iter().map(|e| (&m * &e.lift()).into_vec()).collect()
    }

    fn vertical_basis(&self, g: &Arrow, _side: Side) -> Vec<Vec<f64>> {
        self.tangent_basis(g)
    }

    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        let pinv: Mat<S> = self.group.inverse(&self.matrix(p)).map(S::from_f64);
        let rel = &pinv * &self.matrix(q);
        Ok(self.group.vee(&self.group.log(&rel)?))
    }

    fn membership_residual(&self, g: &Arrow) -> f64 {
        self.group.membership_residual(&self.matrix(g))
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, _y: &[f64]) -> Arrow {
        self.arrow(&self.group.random_element(rng))
    }

    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, g: &Arrow, _dy: &[f64]) -> Vec<f64> {
        let v = self.group.random_algebra(rng, 1.0);
        (&self.matrix(g) * &v).into_vec()
    }
}
