//! Lie groupoids in chart coordinates.
//!
//! Arrows are [`Point`]s: a chart label plus a coordinate vector. Every structure
//! map is generic over [`Scalar`], so tangent maps are obtained by evaluating on
//! dual numbers.
//!
//! Conventions: `α` is the source and `β` the target; `compose(g, h) = gh` needs
//! `α(g) = β(h)`, and then `α(gh) = α(h)`, `β(gh) = β(g)`.

pub mod axioms;
pub mod gauge;
pub mod group;
pub mod morphism;
pub mod pair;
pub mod tangent;

use crate::error::Result;
use crate::manifolds::BaseManifold;
use crate::numerics::dual::{seed, split};
use crate::numerics::{Dual, Scalar};
use rand::RngCore;

pub use axioms::{check_axioms, AxiomReport};
pub use gauge::{GaugeGroupoid, GroupBundle, PrincipalBundle};
pub use group::GroupOverPoint;
pub use morphism::{Morphism, MorphismKind};
pub use pair::PairGroupoid;
pub use tangent::TangentGroupoid;

/// Tolerance on `α(g) = β(h)` when composing.
pub const COMPOSE_TOL: f64 = 1e-8;

/// Chart label of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chart {
    Global,
    /// Arrow chart of a gauge-type groupoid: arc of the target and arc of the source.
    Arcs { target: usize, source: usize },
}

/// A point of a manifold in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S = f64> {
    pub chart: Chart,
    pub coords: Vec<S>,
}

/// Elements of a groupoid.
pub type Arrow<S = f64> = Point<S>;

impl<S: Scalar> Point<S> {
    pub fn new(chart: Chart, coords: Vec<S>) -> Self {
        Point { chart, coords }
    }

    pub fn global(coords: Vec<S>) -> Self {
        Point { chart: Chart::Global, coords }
    }

    /// Real part.
    pub fn values(&self) -> Point<f64> {
        Point { chart: self.chart, coords: self.coords.iter().map(|c| c.value()).collect() }
    }
}

impl Point<f64> {
    /// Lift to any scalar type with zero infinitesimal part.
    pub fn lift<S: Scalar>(&self) -> Point<S> {
        Point { chart: self.chart, coords: self.coords.iter().map(|&c| S::from_f64(c)).collect() }
    }

    /// `self + ε v` in coordinates.
    pub fn seeded(&self, v: &[f64]) -> Point<Dual<f64>> {
        Point { chart: self.chart, coords: seed(&self.coords, v) }
    }
}

impl<S: Scalar> Point<Dual<S>> {
    /// Split into base point and tangent coordinates.
    pub fn split(&self) -> (Point<S>, Vec<S>) {
        let (v, d) = split(&self.coords);
        (Point { chart: self.chart, coords: v }, d)
    }
}

/// Lift a point with a tangent vector to dual numbers.
pub fn seed_point<S: Scalar>(p: &Point<S>, v: &[S]) -> Point<Dual<S>> {
    Point { chart: p.chart, coords: seed(&p.coords, v) }
}

/// Which anchor-like map a property refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// The structure maps of a Lie groupoid.
///
/// Methods are generic over the scalar type; arrows given as `Point<f64>` are
/// real points, while `Point<S>` arguments may carry infinitesimals.
pub trait Groupoid {
    fn name(&self) -> String;

    /// The base manifold of objects.
    fn base(&self) -> BaseManifold;

    /// Number of chart coordinates of an arrow.
    fn coord_dim(&self) -> usize;

    /// Manifold dimension of the arrow space.
    fn arrow_dim(&self) -> usize;

    fn source<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S>;

    fn target<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S>;

    /// Unit at `x` in the preferred chart.
    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S>;

    /// Unit at `x` in a given chart label.
    fn unit_in<S: Scalar>(&self, x: &[S], chart: Chart) -> Result<Arrow<S>> {
        let _ = chart;
        Ok(self.unit(x))
    }

    /// Chart of the unit 1_{β(g)} matching the target chart of `g`.
    fn target_unit_chart(&self, g: &Chart) -> Chart {
        let _ = g;
        Chart::Global
    }

    /// Chart of the unit 1_{α(g)} matching the source chart of `g`.
    fn source_unit_chart(&self, g: &Chart) -> Chart {
        let _ = g;
        Chart::Global
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S>;

    /// `gh`, defined when `α(g) = β(h)`.
    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>>;

    /// Re-express an arrow in another chart.
    fn to_chart<S: Scalar>(&self, g: &Arrow<S>, chart: Chart) -> Result<Arrow<S>> {
        let _ = chart;
        Ok(g.clone())
    }

    /// Chart-independent distance between arrows.
    fn distance(&self, g: &Arrow, h: &Arrow) -> f64;

    /// Distance between base points.
    fn base_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.base().distance(a, b)
    }

    /// Basis of the tangent space at `g` in coordinates (`arrow_dim` vectors of length `coord_dim`).
    /// Smooth in `g`, so it may be differentiated by evaluating on duals.
    fn tangent_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>>;

    /// Basis of `ker Tα` (Side::Source) or `ker Tβ` (Side::Target) at `g`.
    fn vertical_basis(&self, g: &Arrow, side: Side) -> Vec<Vec<f64>>;

    /// Local coordinates of `q` relative to `p`: zero iff `q = p`, with invertible
    /// derivative in `q` at `p`.
    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>>;

    /// How far an arrow is from satisfying the constraints of its coordinate model.
    fn membership_residual(&self, g: &Arrow) -> f64 {
        let _ = g;
        0.0
    }

    fn random_base_point(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.base().random_point(rng)
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow;

    fn random_arrow_with_source(&self, rng: &mut dyn RngCore, x: &[f64]) -> Arrow {
        self.invert(&self.random_arrow_with_target(rng, x))
    }

    fn random_arrow(&self, rng: &mut dyn RngCore) -> Arrow {
        let y = self.random_base_point(rng);
        self.random_arrow_with_target(rng, &y)
    }

    /// A random tangent vector at `g` whose image under `Tβ` is `dy`.
    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, g: &Arrow, dy: &[f64]) -> Vec<f64>;

    /// `Tα(v)` for `v` tangent at `g`.
    fn tangent_source(&self, g: &Arrow, v: &[f64]) -> Vec<f64> {
        split(&self.source(&g.seeded(v))).1
    }

    /// `Tβ(v)` for `v` tangent at `g`.
    fn tangent_target(&self, g: &Arrow, v: &[f64]) -> Vec<f64> {
        split(&self.target(&g.seeded(v))).1
    }
}

/// Dispatch over the concrete groupoids of the crate.
#[derive(Clone, Debug)]
pub enum GroupoidDescriptor {
    Pair(PairGroupoid),
    Group(GroupOverPoint),
    Gauge(GaugeGroupoid),
    GroupBundle(GroupBundle),
}

macro_rules! dispatch {
    ($self:ident, $g:ident => $e:expr) => {
        match $self {
            GroupoidDescriptor::Pair($g) => $e,
            GroupoidDescriptor::Group($g) => $e,
            GroupoidDescriptor::Gauge($g) => $e,
            GroupoidDescriptor::GroupBundle($g) => $e,
        }
    };
}

impl From<PairGroupoid> for GroupoidDescriptor {
    fn from(g: PairGroupoid) -> Self {
        GroupoidDescriptor::Pair(g)
    }
}

impl From<GroupOverPoint> for GroupoidDescriptor {
    fn from(g: GroupOverPoint) -> Self {
        GroupoidDescriptor::Group(g)
    }
}

impl From<GaugeGroupoid> for GroupoidDescriptor {
    fn from(g: GaugeGroupoid) -> Self {
        GroupoidDescriptor::Gauge(g)
    }
}

impl From<GroupBundle> for GroupoidDescriptor {
    fn from(g: GroupBundle) -> Self {
        GroupoidDescriptor::GroupBundle(g)
    }
}

impl GroupoidDescriptor {
    pub fn as_gauge(&self) -> Option<&GaugeGroupoid> {
        match self {
            GroupoidDescriptor::Gauge(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_group(&self) -> Option<&GroupOverPoint> {
        match self {
            GroupoidDescriptor::Group(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<&PairGroupoid> {
        match self {
            GroupoidDescriptor::Pair(g) => Some(g),
            _ => None,
        }
    }

    /// Whether all arrows live in a single chart (no chart bookkeeping needed).
    pub fn has_global_chart(&self) -> bool {
        match self {
            GroupoidDescriptor::Pair(_) | GroupoidDescriptor::Group(_) => true,
            GroupoidDescriptor::Gauge(g) => g.bundle().cover().len() == 1,
            GroupoidDescriptor::GroupBundle(g) => g.bundle().cover().len() == 1,
        }
    }
}

impl Groupoid for GroupoidDescriptor {
    fn name(&self) -> String {
        dispatch!(self, g => g.name())
    }
    fn base(&self) -> BaseManifold {
        dispatch!(self, g => g.base())
    }
    fn coord_dim(&self) -> usize {
        dispatch!(self, g => g.coord_dim())
    }
    fn arrow_dim(&self) -> usize {
        dispatch!(self, g => g.arrow_dim())
    }
    fn source<S: Scalar>(&self, a: &Arrow<S>) -> Vec<S> {
        dispatch!(self, g => g.source(a))
    }
    fn target<S: Scalar>(&self, a: &Arrow<S>) -> Vec<S> {
        dispatch!(self, g => g.target(a))
    }
    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S> {
        dispatch!(self, g => g.unit(x))
    }
    fn unit_in<S: Scalar>(&self, x: &[S], chart: Chart) -> Result<Arrow<S>> {
        dispatch!(self, g => g.unit_in(x, chart))
    }
    fn target_unit_chart(&self, c: &Chart) -> Chart {
        dispatch!(self, g => g.target_unit_chart(c))
    }
    fn source_unit_chart(&self, c: &Chart) -> Chart {
        dispatch!(self, g => g.source_unit_chart(c))
    }
    fn invert<S: Scalar>(&self, a: &Arrow<S>) -> Arrow<S> {
        dispatch!(self, g => g.invert(a))
    }
    fn compose<S: Scalar>(&self, a: &Arrow<S>, b: &Arrow<S>) -> Result<Arrow<S>> {
        dispatch!(self, g => g.compose(a, b))
    }
    fn to_chart<S: Scalar>(&self, a: &Arrow<S>, chart: Chart) -> Result<Arrow<S>> {
        dispatch!(self, g => g.to_chart(a, chart))
    }
    fn distance(&self, a: &Arrow, b: &Arrow) -> f64 {
        dispatch!(self, g => g.distance(a, b))
    }
    fn tangent_basis<S: Scalar>(&self, a: &Arrow<S>) -> Vec<Vec<S>> {
        dispatch!(self, g => g.tangent_basis(a))
    }
    fn vertical_basis(&self, a: &Arrow, side: Side) -> Vec<Vec<f64>> {
        dispatch!(self, g => g.vertical_basis(a, side))
    }
    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        dispatch!(self, g => g.difference(p, q))
    }
    fn membership_residual(&self, a: &Arrow) -> f64 {
        dispatch!(self, g => g.membership_residual(a))
    }
    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow {
        dispatch!(self, g => g.random_arrow_with_target(rng, y))
    }
    fn random_arrow_with_source(&self, rng: &mut dyn RngCore, x: &[f64]) -> Arrow {
        dispatch!(self, g => g.random_arrow_with_source(rng, x))
    }
    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, a: &Arrow, dy: &[f64]) -> Vec<f64> {
        dispatch!(self, g => g.random_tangent_with_target_velocity(rng, a, dy))
    }
}

/// Action of a local bisection value on an arrow: `ψ(β(g))·g` where `value` is the
/// arrow ψ(β(g)).
pub fn act_on<G: Groupoid, S: Scalar>(gpd: &G, value: &Arrow<S>, g: &Arrow<S>) -> Result<Arrow<S>> {
    gpd.compose(value, g)
}

/// `T R_g(v)`: push a tangent vector at the unit `u = 1_{β(g)}` to `g` by right translation.
pub fn right_translate<G: Groupoid, S: Scalar>(gpd: &G, u: &Arrow<S>, v: &[S], g: &Arrow<S>) -> Result<Vec<S>> {
    let lifted = seed_point(u, v);
    let gd = Point { chart: g.chart, coords: g.coords.iter().map(|&c| Dual::constant(c)).collect() };
    let prod = gpd.compose(&lifted, &gd)?;
    Ok(split(&prod.coords).1)
}

/// A random combination `Σ c_k b_k` of `basis` whose image under a linear map is
/// `target`, where `images[k]` is the image of `basis[k]`. Returns `None` if the
/// map is not onto.
pub fn random_with_image(
    rng: &mut dyn RngCore,
    basis: &[Vec<f64>],
    images: &[Vec<f64>],
    target: &[f64],
) -> Option<Vec<f64>> {
    use rand::Rng;
    let mut c: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let r = target.len();
    if r > 0 {
        let img = |c: &[f64]| (0..r).map(|i| c.iter().zip(images).map(|(ck, im)| ck * im[i]).sum::<f64>()).collect::<Vec<_>>();
        let current = img(&c);
        let rhs: Vec<f64> = target.iter().zip(&current).map(|(t, v)| t - v).collect();
        let gram: Vec<Vec<f64>> =
            (0..r).map(|i| (0..r).map(|j| images.iter().map(|im| im[i] * im[j]).sum()).collect()).collect();
        let lam = crate::numerics::root::solve_linear(&gram, &rhs)?;
        for (ck, im) in c.iter_mut().zip(images) {
            *ck += (0..r).map(|i| im[i] * lam[i]).sum::<f64>();
        }
    }
    let n = basis.first().map_or(0, |b| b.len());
    Some((0..n).map(|i| c.iter().zip(basis).map(|(ck, b)| ck * b[i]).sum()).collect())
}
