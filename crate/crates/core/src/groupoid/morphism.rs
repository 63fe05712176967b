//! Groupoid morphisms over the identity of the base.

use super::{Arrow, Groupoid, GroupoidDescriptor, PairGroupoid};
use crate::error::{Error, Result};
use crate::numerics::{Dual, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Identity,
    /// `(β, α): G → M × M`.
    Anchor,
    /// The group bundle inside the gauge groupoid of the same bundle.
    BundleInclusion,
}

#[derive(Clone, Debug)]
pub struct Morphism {
    kind: MorphismKind,
    source: GroupoidDescriptor,
    target: GroupoidDescriptor,
}

impl Morphism {
    pub fn identity(g: GroupoidDescriptor) -> Self {
        Morphism { kind: MorphismKind::Identity, source: g.clone(), target: g }
    }

    pub fn anchor(g: GroupoidDescriptor) -> Self {
        let target = PairGroupoid::new(g.base()).into();
        Morphism { kind: MorphismKind::Anchor, source: g, target }
    }

    pub fn bundle_inclusion(g: GroupoidDescriptor) -> Result<Self> {
        let GroupoidDescriptor::GroupBundle(b) = &g else {
            return Err(Error::Precondition("bundle inclusion needs a group bundle".into()));
        };
        let target = super::GaugeGroupoid::new(b.bundle().clone()).into();
        Ok(Morphism { kind: MorphismKind::BundleInclusion, source: g, target })
    }

    pub fn kind(&self) -> MorphismKind {
        self.kind
    }

    pub fn source(&self) -> &GroupoidDescriptor {
        &self.source
    }

    pub fn target(&self) -> &GroupoidDescriptor {
        &self.target
    }

    pub fn apply<S: Scalar>(&self, g: &Arrow<S>) -> Result<Arrow<S>> {
        match self.kind {
            MorphismKind::Identity => Ok(g.clone()),
            MorphismKind::Anchor => {
                let pair = self.target.as_pair().expect("anchor target is a pair groupoid");
                Ok(pair.arrow(&self.source.target(g), &self.source.source(g)))
            }
            MorphismKind::BundleInclusion => {
                let gauge = self.target.as_gauge().expect("inclusion target is a gauge groupoid");
                let GroupoidDescriptor::GroupBundle(b) = &self.source else { unreachable!() };
                let super::Chart::Arcs { target: i, .. } = g.chart else {
                    return Err(Error::Precondition("group bundle arrow without arc chart".into()));
                };
                gauge.arrow(i, i, g.coords[0], g.coords[0], &b.h_part(g))
            }
        }
    }

    /// `Tf(v)` at `g`.
    pub fn tangent(&self, g: &Arrow, v: &[f64]) -> Result<(Arrow, Vec<f64>)> {
        let img: Arrow<Dual> = self.apply(&g.seeded(v))?;
        Ok(img.split())
    }

    /// Largest violation of `f(gh) = f(g)f(h)`, `f(1_x) = 1_x` and `f(g⁻¹) = f(g)⁻¹`.
    pub fn homomorphism_residual(&self, n: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, t) = (&self.source, &self.target);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let g = s.random_arrow(&mut rng);
            let h = s.random_arrow_with_target(&mut rng, &s.source(&g));
            let lhs = self.apply(&s.compose(&g, &h)?)?;
            let rhs = t.compose(&self.apply(&g)?, &self.apply(&h)?)?;
            worst = worst.max(t.distance(&lhs, &rhs));
            let x = s.source(&g);
            worst = worst.max(t.distance(&self.apply(&s.unit(&x))?, &t.unit(&x)));
            worst = worst.max(t.distance(&self.apply(&s.invert(&g))?, &t.invert(&self.apply(&g)?)));
        }
        Ok(worst)
    }
}
