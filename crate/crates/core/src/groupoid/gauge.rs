//! Principal bundles over the circle, their gauge groupoids and group bundles.
//!
//! A bundle `P → S¹` with structure group `H` is described by local sections
//! `σ_i` over the arcs of a cover and transition functions
//! `k_ij(x) = δ(σ_i(x), σ_j(x))`, so that `σ_j = σ_i·k_ij`.
//!
//! A gauge arrow in chart `(i, j)` has coordinates `(y, x, h)` and stands for the
//! class `⟨σ_i(y)·h, σ_j(x)⟩`, with source `x` and target `y`.

use super::{Arrow, Chart, Groupoid, Point, Side, COMPOSE_TOL};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::manifolds::{BaseManifold, Cover, MatrixGroup, PartitionOfUnity};
use crate::numerics::root::{wrap_pi, wrap_tau};
use crate::numerics::{Dual, Mat, Scalar};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use std::sync::Arc;

/// Transition `k_{to,from}(x) = exp(Σ_k ξ_k(x) E_k)`, with `ξ` evaluated at the
/// representative of `x` in arc `from`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub to: usize,
    pub from: usize,
    pub algebra: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct PrincipalBundle {
    group: MatrixGroup,
    pou: PartitionOfUnity,
    transitions: Vec<Transition>,
}

impl PrincipalBundle {
    /// Build and validate a bundle. Overlapping arc pairs without a listed
    /// transition get the identity transition.
    pub fn new(group: MatrixGroup, cover: Cover, transitions: Vec<Transition>) -> Result<Self> {
        for t in &transitions {
            if t.to >= cover.len() || t.from >= cover.len() || t.to == t.from {
                return Err(Error::Config(format!("transition ({}, {}) does not name two distinct arcs", t.to, t.from)));
            }
            if t.algebra.len() != group.algebra_dim() {
                return Err(Error::Config(format!(
                    "transition ({}, {}) needs {} algebra components",
                    t.to,
                    t.from,
                    group.algebra_dim()
                )));
            }
            if t.algebra.iter().any(|e| e.arity() > 1) {
                return Err(Error::Config("transition expressions may only use `x`".into()));
            }
        }
        let pou = PartitionOfUnity::new(cover)?;
        let bundle = PrincipalBundle { group, pou, transitions };
        bundle.check_cocycle()?;
        Ok(bundle)
    }

    /// The product bundle in a single global chart.
    pub fn trivial(group: MatrixGroup) -> Self {
        PrincipalBundle::new(group, Cover::single(), vec![]).expect("single chart is valid")
    }

    /// The two-arc cover with identity transitions.
    pub fn trivial_two_arcs(group: MatrixGroup) -> Self {
        PrincipalBundle::new(group, Cover::two_arcs(), vec![]).expect("two arcs are valid")
    }

    /// Two arcs around 0 and π with `k_21(x) = exp(x ê_z)` in SO(3).
    pub fn reference() -> Self {
        let algebra = vec![Expr::Const(0.0), Expr::Const(0.0), Expr::Var(0)];
        PrincipalBundle::new(MatrixGroup::SO3, Cover::two_arcs(), vec![Transition { to: 1, from: 0, algebra }])
            .expect("reference bundle is valid")
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.group
    }

    pub fn cover(&self) -> &Cover {
        self.pou.cover()
    }

    pub fn partition(&self) -> &PartitionOfUnity {
        &self.pou
    }

    pub fn is_trivial(&self) -> bool {
        self.transitions.is_empty()
    }

    fn check_cocycle(&self) -> Result<()> {
        let n = self.cover().len();
        let mut worst: f64 = 0.0;
        for k in 0..720 {
            let x = std::f64::consts::TAU * k as f64 / 720.0;
            let charts = self.cover().charts_at(x);
            for &a in &charts {
                for &b in &charts {
                    for &c in &charts {
                        let ab = self.transition::<f64>(a, b, x)?;
                        let bc = self.transition::<f64>(b, c, x)?;
                        let ac = self.transition::<f64>(a, c, x)?;
                        worst = worst.max((&(&ab * &bc) - &ac).max_abs());
                    }
                }
            }
        }
        if worst > 1e-10 || n == 0 {
            return Err(Error::Config(format!("transitions violate the cocycle condition (residual {worst:e})")));
        }
        Ok(())
    }

    /// `k_ab(x)`; requires `x ∈ U_a ∩ U_b`.
    pub fn transition<S: Scalar>(&self, a: usize, b: usize, x: S) -> Result<Mat<S>> {
        if a == b {
            return Ok(self.group.identity());
        }
        let arcs = &self.cover().arcs;
        let xv = x.value();
        if !arcs[a].contains(xv) || !arcs[b].contains(xv) {
            return Err(Error::OutOfChart(format!("x = {xv:.6} is not in the overlap of arcs {a} and {b}")));
        }
        for t in &self.transitions {
            if t.to == a && t.from == b {
                return Ok(self.eval_transition(t, x));
            }
            if t.to == b && t.from == a {
                return Ok(self.group.inverse(&self.eval_transition(t, x)));
            }
        }
        Ok(self.group.identity())
    }

    fn eval_transition<S: Scalar>(&self, t: &Transition, x: S) -> Mat<S> {
        let xr = self.cover().arcs[t.from].rep(x);
        let c: Vec<S> = t.algebra.iter().map(|e| e.eval(&[xr])).collect();
        self.group.exp(&self.group.hat(&c))
    }

    /// Local connection potential `A_i(x) = Σ_l λ_l(x)·(−k_il'(x) k_il(x)^{-1})` on `U_i`.
    pub fn connection<S: Scalar>(&self, i: usize, x: S) -> Result<Mat<S>> {
        let n = self.group.n();
        let mut a = Mat::zeros(n);
        if self.is_trivial() {
            return Ok(a);
        }
        for l in 0..self.pou.len() {
            let lam = self.pou.eval(l, x);
            if lam.value() == 0.0 || l == i {
                continue;
            }
            let k = self.transition::<Dual<S>>(i, l, Dual::new(x, S::one()))?;
            let kv = k.map(|d| d.value);
            let dk = k.map(|d| d.deriv);
            let term = &dk * &self.group.inverse(&kv);
            a = &a - &term.scale(lam);
        }
        Ok(a)
    }

    /// Representative of `x` in arc `i`, or an out-of-chart error.
    pub fn chart_coord<S: Scalar>(&self, i: usize, x: S) -> Result<S> {
        let arc = &self.cover().arcs[i];
        if !arc.contains(x.value()) {
            return Err(Error::OutOfChart(format!("x = {:.6} is outside arc {i}", x.value())));
        }
        Ok(arc.rep(x))
    }
}

fn arcs_of(c: &Chart) -> (usize, usize) {
    match c {
        Chart::Arcs { target, source } => (*target, *source),
        Chart::Global => (0, 0),
    }
}

/// The gauge groupoid `(P × P)/H ⇉ S¹`.
#[derive(Clone, Debug)]
pub struct GaugeGroupoid {
    bundle: Arc<PrincipalBundle>,
}

impl GaugeGroupoid {
    pub fn new(bundle: PrincipalBundle) -> Self {
        GaugeGroupoid { bundle: Arc::new(bundle) }
    }

    pub fn bundle(&self) -> &PrincipalBundle {
        &self.bundle
    }

    fn hn(&self) -> usize {
        self.bundle.group.n()
    }

    /// Vertex-group part of an arrow.
    pub fn h_part<S: Scalar>(&self, g: &Arrow<S>) -> Mat<S> {
        Mat::from_vec(self.hn(), g.coords[2..].to_vec())
    }

    /// Arrow in chart `(i, j)` with target `y`, source `x` and group part `h`.
    pub fn arrow<S: Scalar>(&self, i: usize, j: usize, y: S, x: S, h: &Mat<S>) -> Result<Arrow<S>> {
        let yr = self.bundle.chart_coord(i, y)?;
        let xr = self.bundle.chart_coord(j, x)?;
        let mut coords = vec![yr, xr];
        coords.extend_from_slice(h.as_slice());
        Ok(Point::new(Chart::Arcs { target: i, source: j }, coords))
    }

    pub fn charts(&self, g: &Chart) -> (usize, usize) {
        arcs_of(g)
    }

    fn best_unit_chart(&self, x: f64) -> usize {
        self.bundle.cover().best_chart(x)
    }
}

impl Groupoid for GaugeGroupoid {
    fn name(&self) -> String {
        format!("Gauge({}, {} arcs)", self.bundle.group.name(), self.bundle.cover().len())
    }

    fn base(&self) -> BaseManifold {
        BaseManifold::CIRCLE
    }

    fn coord_dim(&self) -> usize {
        2 + self.hn() * self.hn()
    }

    fn arrow_dim(&self) -> usize {
        2 + self.bundle.group.algebra_dim()
    }

    fn source<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        BaseManifold::CIRCLE.wrap(&g.coords[1..2])
    }

    fn target<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        BaseManifold::CIRCLE.wrap(&g.coords[0..1])
    }

    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S> {
        let i = self.best_unit_chart(x[0].value());
        self.arrow(i, i, x[0], x[0], &self.bundle.group.identity()).expect("best chart contains the point")
    }

    fn unit_in<S: Scalar>(&self, x: &[S], chart: Chart) -> Result<Arrow<S>> {
        let (i, j) = arcs_of(&chart);
        if i != j {
            return Err(Error::Precondition("unit chart must have equal arcs".into()));
        }
        self.arrow(i, i, x[0], x[0], &self.bundle.group.identity())
    }

    fn target_unit_chart(&self, g: &Chart) -> Chart {
        let (i, _) = arcs_of(g);
        Chart::Arcs { target: i, source: i }
    }

    fn source_unit_chart(&self, g: &Chart) -> Chart {
        let (_, j) = arcs_of(g);
        Chart::Arcs { target: j, source: j }
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S> {
        let (i, j) = arcs_of(&g.chart);
        let hinv = self.bundle.group.inverse(&self.h_part(g));
        let mut coords = vec![g.coords[1], g.coords[0]];
        coords.extend_from_slice(hinv.as_slice());
        Point::new(Chart::Arcs { target: j, source: i }, coords)
    }

    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>> {
        let (i, j) = arcs_of(&g.chart);
        let (jp, l) = arcs_of(&h.chart);
        let (xg, yh) = (g.coords[1], h.coords[0]);
        if wrap_pi(xg.value() - yh.value()).abs() > COMPOSE_TOL {
            return Err(Error::NotComposable {
                source_point: vec![wrap_tau(xg.value())],
                target_point: vec![wrap_tau(yh.value())],
            });
        }
        let k = self.bundle.transition(j, jp, xg)?;
        let hh = &(&self.h_part(g) * &k) * &self.h_part(h);
        let mut coords = vec![g.coords[0], h.coords[1]];
        coords.extend_from_slice(hh.as_slice());
        Ok(Point::new(Chart::Arcs { target: i, source: l }, coords))
    }

    fn to_chart<S: Scalar>(&self, g: &Arrow<S>, chart: Chart) -> Result<Arrow<S>> {
        let (i, j) = arcs_of(&g.chart);
        let (m, n) = arcs_of(&chart);
        if (i, j) == (m, n) {
            return Ok(g.clone());
        }
        let (y, x) = (g.coords[0], g.coords[1]);
        let kmi = self.bundle.transition(m, i, y)?;
        let knj = self.bundle.transition(n, j, x)?;
        let h = &(&kmi * &self.h_part(g)) * &self.bundle.group.inverse(&knj);
        self.arrow(m, n, y, x, &h)
    }

    fn distance(&self, g: &Arrow, h: &Arrow) -> f64 {
        let hc = match self.to_chart(h, g.chart) {
            Ok(hc) => hc,
            Err(_) => {
                let best = |a: &Arrow| {
                    let c = self.bundle.cover();
                    Chart::Arcs { target: c.best_chart(a.coords[0]), source: c.best_chart(a.coords[1]) }
                };
                let (Ok(gb), Ok(hb)) = (self.to_chart(g, best(g)), self.to_chart(h, best(g))) else {
                    return f64::INFINITY;
                };
                let _ = best(h);
                return self.distance(&gb, &hb);
            }
        };
        wrap_pi(g.coords[0] - hc.coords[0]).abs()
            + wrap_pi(g.coords[1] - hc.coords[1]).abs()
            + (&self.h_part(g) - &self.h_part(&hc)).norm()
    }

    fn base_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        BaseManifold::CIRCLE.distance(a, b)
    }

    fn tangent_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>> {
        let n = self.coord_dim();
        let mut basis = Vec::new();
        for k in 0..2 {
            let mut v = vec![S::zero(); n];
            v[k] = S::one();
            basis.push(v);
        }
        let h = self.h_part(g);
        for e in self.bundle.group.algebra_basis() {
            let mut v = vec![S::zero(), S::zero()];
            v.extend((&h * &e.lift()).into_vec());
            basis.push(v);
        }
        basis
    }

    fn vertical_basis(&self, g: &Arrow, side: Side) -> Vec<Vec<f64>> {
        let drop = match side {
            Side::Source => 1,
            Side::Target => 0,
        };
        self.tangent_basis(g).into_iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, v)| v).collect()
    }

    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        let qc = self.to_chart(q, p.chart)?;
        let dy = qc.coords[0].shift(-p.coords[0]);
        let dx = qc.coords[1].shift(-p.coords[1]);
        let wrap = |d: S| d.shift(wrap_pi(d.value()) - d.value());
        let grp = &self.bundle.group;
        let pinv = grp.inverse(&self.h_part(p)).map(S::from_f64);
        let rel = &pinv * &self.h_part(&qc);
        let mut out = vec![wrap(dy), wrap(dx)];
        out.extend(grp.vee(&grp.log(&rel)?));
        Ok(out)
    }

    fn membership_residual(&self, g: &Arrow) -> f64 {
        self.bundle.group.membership_residual(&self.h_part(g))
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow {
        let x = rng.gen_range(0.0..std::f64::consts::TAU);
        let cover = self.bundle.cover();
        let i = *cover.charts_at(y[0]).choose(rng).expect("cover");
        let j = *cover.charts_at(x).choose(rng).expect("cover");
        let h = self.bundle.group.random_element(rng);
        self.arrow(i, j, y[0], x, &h).expect("charts contain the points")
    }

    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, g: &Arrow, dy: &[f64]) -> Vec<f64> {
        let mut v = vec![dy[0], rng.gen_range(-1.0..1.0)];
        let xi = self.bundle.group.random_algebra(rng, 1.0);
        v.extend((&self.h_part(g) * &xi).into_vec());
        v
    }
}

/// The group bundle `P ×_{S¹} P / H`: arrows `⟨σ_i(x)h, σ_i(x)⟩` with `α = β = x`.
///
/// Coordinates are `(x, h)` in chart `(i, i)`.
#[derive(Clone, Debug)]
pub struct GroupBundle {
    bundle: Arc<PrincipalBundle>,
}

impl GroupBundle {
    pub fn new(bundle: PrincipalBundle) -> Self {
        GroupBundle { bundle: Arc::new(bundle) }
    }

    pub fn of_gauge(g: &GaugeGroupoid) -> Self {
        GroupBundle { bundle: g.bundle.clone() }
    }

    pub fn bundle(&self) -> &PrincipalBundle {
        &self.bundle
    }

    pub fn h_part<S: Scalar>(&self, g: &Arrow<S>) -> Mat<S> {
        Mat::from_vec(self.bundle.group.n(), g.coords[1..].to_vec())
    }

    fn fibre_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>> {
        let h = self.h_part(g);
        self.bundle
            .group
            .algebra_basis()
            .iter()
            .map(|e| {
                let mut v = vec![S::zero()];
                v.extend((&h * &e.lift()).into_vec());
                v
            })
            .collect()
    }

    pub fn arrow<S: Scalar>(&self, i: usize, x: S, h: &Mat<S>) -> Result<Arrow<S>> {
        let xr = self.bundle.chart_coord(i, x)?;
        let mut coords = vec![xr];
        coords.extend_from_slice(h.as_slice());
        Ok(Point::new(Chart::Arcs { target: i, source: i }, coords))
    }
}

impl Groupoid for GroupBundle {
    fn name(&self) -> String {
        format!("GroupBundle({}, {} arcs)", self.bundle.group.name(), self.bundle.cover().len())
    }

    fn base(&self) -> BaseManifold {
        BaseManifold::CIRCLE
    }

    fn coord_dim(&self) -> usize {
        1 + self.bundle.group.n().pow(2)
    }

    fn arrow_dim(&self) -> usize {
        1 + self.bundle.group.algebra_dim()
    }

    fn source<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        BaseManifold::CIRCLE.wrap(&g.coords[0..1])
    }

    fn target<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        BaseManifold::CIRCLE.wrap(&g.coords[0..1])
    }

    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S> {
        let i = self.bundle.cover().best_chart(x[0].value());
        self.arrow(i, x[0], &self.bundle.group.identity()).expect("best chart")
    }

    fn unit_in<S: Scalar>(&self, x: &[S], chart: Chart) -> Result<Arrow<S>> {
        let (i, _) = arcs_of(&chart);
        self.arrow(i, x[0], &self.bundle.group.identity())
    }

    fn target_unit_chart(&self, g: &Chart) -> Chart {
        *g
    }

    fn source_unit_chart(&self, g: &Chart) -> Chart {
        *g
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S> {
        let hinv = self.bundle.group.inverse(&self.h_part(g));
        let mut coords = vec![g.coords[0]];
        coords.extend_from_slice(hinv.as_slice());
        Point::new(g.chart, coords)
    }

    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>> {
        let (xg, xh) = (g.coords[0], h.coords[0]);
        if wrap_pi(xg.value() - xh.value()).abs() > COMPOSE_TOL {
            return Err(Error::NotComposable {
                source_point: vec![wrap_tau(xg.value())],
                target_point: vec![wrap_tau(xh.value())],
            });
        }
        let hc = self.to_chart(h, g.chart)?;
        let prod = &self.h_part(g) * &self.h_part(&hc);
        let mut coords = vec![xg];
        coords.extend_from_slice(prod.as_slice());
        Ok(Point::new(g.chart, coords))
    }

    fn to_chart<S: Scalar>(&self, g: &Arrow<S>, chart: Chart) -> Result<Arrow<S>> {
        let (i, _) = arcs_of(&g.chart);
        let (m, _) = arcs_of(&chart);
        if i == m {
            return Ok(g.clone());
        }
        let x = g.coords[0];
        let k = self.bundle.transition(m, i, x)?;
        let h = &(&k * &self.h_part(g)) * &self.bundle.group.inverse(&k);
        self.arrow(m, x, &h)
    }

    fn distance(&self, g: &Arrow, h: &Arrow) -> f64 {
        match self.to_chart(h, g.chart) {
            Ok(hc) => wrap_pi(g.coords[0] - hc.coords[0]).abs() + (&self.h_part(g) - &self.h_part(&hc)).norm(),
            Err(_) => f64::INFINITY,
        }
    }

    fn tangent_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>> {
        let mut v = vec![S::zero(); self.coord_dim()];
        v[0] = S::one();
        let mut basis = vec![v];
        basis.extend(self.fibre_basis(g));
        basis
    }

    fn vertical_basis(&self, g: &Arrow, _side: Side) -> Vec<Vec<f64>> {
        self.fibre_basis(g)
    }

    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        let qc = self.to_chart(q, p.chart)?;
        let dx = qc.coords[0].shift(-p.coords[0]);
        let grp = &self.bundle.group;
        let pinv = grp.inverse(&self.h_part(p)).map(S::from_f64);
        let mut out = vec![dx.shift(wrap_pi(dx.value()) - dx.value())];
        out.extend(grp.vee(&grp.log(&(&pinv * &self.h_part(&qc)))?));
        Ok(out)
    }

    fn membership_residual(&self, g: &Arrow) -> f64 {
        self.bundle.group.membership_residual(&self.h_part(g))
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow {
        let i = *self.bundle.cover().charts_at(y[0]).choose(rng).expect("cover");
        let h = self.bundle.group.random_element(rng);
        self.arrow(i, y[0], &h).expect("chart contains the point")
    }

    fn random_arrow_with_source(&self, rng: &mut dyn RngCore, x: &[f64]) -> Arrow {
        self.random_arrow_with_target(rng, x)
    }

    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, g: &Arrow, dy: &[f64]) -> Vec<f64> {
        let mut v = vec![dy[0]];
        let xi = self.bundle.group.random_algebra(rng, 1.0);
        v.extend((&self.h_part(g) * &xi).into_vec());
        v
    }
}
