//! The group `Bis(G)` of bisections: sections `σ` of `α` such that `β∘σ` is a
//! diffeomorphism of the base.
//!
//! A [`Bisection`] is a closed-form expression tree that can be evaluated on any
//! [`Scalar`], so derivatives in the base point come from dual numbers. The grid
//! form (values and Jacobians of `β∘σ` on a uniform grid) is computed once on
//! first use and drives the diffeomorphism test and file export.
//!
//! ```
//! use lie_bisections::bisection::Bisection;
//! let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
//! let g = f.inverse().unwrap();
//! let id = f.star(&g).unwrap();
//! assert!(id.sup_distance(&Bisection::unit(f.groupoid().clone())).unwrap() < 1e-12);
//! assert!((f.diagnostics().min_derivative - 0.7).abs() < 1e-3);
//! ```

use crate::algebroid::AlgebroidSection;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::flow::FlowSlice;
use crate::groupoid::{Arrow, Groupoid, GroupoidDescriptor, GroupOverPoint, Morphism, PairGroupoid};
use crate::local_addition::LocalAddition;
use crate::manifolds::{BaseManifold, PartitionOfUnity};
use crate::numerics::dual::{seed, split};
use crate::numerics::grid::DEFAULT_GRID;
use crate::numerics::root::{invert_circle_diffeo, newton_solve, wrap_pi, NEWTON_MAX_ITER};
use crate::numerics::{Dual, Mat, PeriodicGridFunction, Scalar};
use rand::Rng;
use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

/// Smallest accepted derivative (circle) or Jacobian determinant (torus) of `β∘σ`.
pub const DIFFEO_EPS: f64 = 1e-8;

/// Accuracy required of `α∘σ = id` on the grid.
pub const ALPHA_TOL: f64 = 1e-10;

const INVERSE_TOL: f64 = 1e-13;

// Chord refinements after the real Newton solve; each one fixes one more order
// of infinitesimals when the inverse is evaluated on nested duals.
const CHORD_STEPS: usize = 3;

/// Grid size used for a base manifold unless overridden.
pub fn default_grid(base: BaseManifold) -> usize {
    match base.dim() {
        0 => 1,
        1 => DEFAULT_GRID,
        2 => 32,
        _ => 8,
    }
}

/// Maps of a torus, used as bisections of its pair groupoid via `σ(x) = (f(x), x)`.
#[derive(Clone, Debug)]
pub enum BaseMap {
    /// `f` given componentwise.
    Expr(Vec<Expr>),
    /// `x + c₀ + Σ_k a_k sin(kx) + b_k cos(kx)` on the circle.
    Fourier { c0: f64, a: Vec<f64>, b: Vec<f64> },
    /// `x + d(x)` with the displacement `d` interpolated from grid samples.
    Grid(Vec<PeriodicGridFunction>),
    /// `x + Λ_k(x)·φ(x)`, with `Λ_k = λ_1 + … + λ_k` and `φ` the wrapped
    /// displacement of `β∘inner`.
    Weighted { pou: PartitionOfUnity, upto: usize, inner: Bisection },
}

impl BaseMap {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        match self {
            BaseMap::Expr(fs) => Ok(fs.iter().map(|f| f.eval(x)).collect()),
            BaseMap::Fourier { c0, a, b } => {
                let mut v = x[0].shift(*c0);
                for (k, (ak, bk)) in a.iter().zip(b).enumerate() {
                    let kx = x[0].scale((k + 1) as f64);
                    v += kx.sin().scale(*ak) + kx.cos().scale(*bk);
                }
                Ok(vec![v])
            }
            BaseMap::Grid(d) => Ok(x.iter().zip(d).map(|(&xi, di)| xi + di.eval(x)).collect()),
            BaseMap::Weighted { pou, upto, inner } => {
                let y = inner.beta(x)?;
                let lam = pou.partial_sum(*upto, x[0]);
                let d = wrapped(y[0] - x[0]);
                Ok(vec![x[0] + lam * d])
            }
        }
    }
}

fn wrapped<S: Scalar>(d: S) -> S {
    d.shift(wrap_pi(d.value()) - d.value())
}

#[derive(Debug)]
enum Node {
    Unit,
    Map(BaseMap),
    /// A fixed arrow over a one-point base.
    Constant(Arrow),
    /// `x ↦ A(s·X(x))` at `1_x`.
    Addition { section: AlgebroidSection, scale: f64, addition: LocalAddition },
    Star(Bisection, Bisection),
    Inverse(Bisection),
    Pushforward(Morphism, Bisection),
    Flow(FlowSlice),
    /// Gauge bisection `x ↦ ⟨σ_i(s(x)), σ_i(x)⟩` of a diffeomorphism `s` localised in arc `i`.
    Lift { chart: usize, map: Bisection },
}

/// Samples of a bisection on the grid of its base.
#[derive(Clone, Debug)]
pub struct GridForm {
    pub points: Vec<Vec<f64>>,
    pub arrows: Vec<Arrow>,
    /// `β(σ(x))`.
    pub beta: Vec<Vec<f64>>,
    /// Jacobian of `β∘σ`; `jacobian[p][i][k] = ∂β_i/∂x_k` at point `p`.
    pub jacobian: Vec<Vec<Vec<f64>>>,
}

/// Outcome of the bisection test.
#[derive(Clone, Debug, PartialEq)]
pub struct BisectionDiagnostics {
    pub valid: bool,
    /// `max |α(σ(x)) − x|` on the grid.
    pub alpha_residual: f64,
    /// Minimum of `(β∘σ)'` on the circle, of `det D(β∘σ)` on higher tori; 1 over a point.
    pub min_derivative: f64,
    /// Winding of `β∘σ` along each coordinate axis.
    pub degree: Vec<f64>,
    pub reason: Option<String>,
}

/// A bisection of a Lie groupoid. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Bisection {
    gpd: GroupoidDescriptor,
    node: Arc<Node>,
    grid_n: usize,
    cache: Arc<OnceLock<std::result::Result<GridForm, Error>>>,
}

impl Bisection {
    fn from_node(gpd: GroupoidDescriptor, node: Node) -> Self {
        let grid_n = default_grid(gpd.base());
        Bisection { gpd, node: Arc::new(node), grid_n, cache: Arc::new(OnceLock::new()) }
    }

    /// The neutral element `x ↦ 1_x`.
    pub fn unit(gpd: impl Into<GroupoidDescriptor>) -> Self {
        Self::from_node(gpd.into(), Node::Unit)
    }

    /// The bisection of `Pair(Tᵈ)` with `β∘σ = f`.
    pub fn from_map(base: BaseManifold, map: BaseMap) -> Result<Self> {
        Self::from_node(PairGroupoid::new(base).into(), Node::Map(map)).validated()
    }

    /// Circle diffeomorphism `x ↦ f(x)` written in the variable `x`.
    pub fn circle_map(src: &str) -> Result<Self> {
        Self::from_map(BaseManifold::CIRCLE, BaseMap::Expr(vec![Expr::parse(src, &["x"])?]))
    }

    pub fn fourier(c0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Precondition("Fourier coefficient lists differ in length".into()));
        }
        Self::from_map(BaseManifold::CIRCLE, BaseMap::Fourier { c0, a, b })
    }

    /// A random Fourier diffeomorphism with `Σ k(|a_k| + |b_k|) = budget`, so that
    /// its derivative stays above `1 − budget`.
    pub fn random_fourier(rng: &mut (impl Rng + ?Sized), modes: usize, budget: f64) -> Self {
        let raw: Vec<(f64, f64)> = (0..modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let total: f64 = raw.iter().enumerate().map(|(k, (a, b))| (k + 1) as f64 * (a.abs() + b.abs())).sum();
        let s = if total > 0.0 { budget / total } else { 0.0 };
        let (a, b) = raw.into_iter().map(|(a, b)| (a * s, b * s)).unzip();
        let c0 = rng.gen_range(-1.0..1.0);
        Self::fourier(c0, a, b).expect("derivative bounded below by 1 − budget")
    }

    /// The constant bisection of a group, `σ(pt) = m`.
    pub fn constant(gpd: &GroupOverPoint, m: &Mat) -> Result<Self> {
        if m.dim() != gpd.group().n() {
            return Err(Error::Precondition("matrix size does not match the group".into()));
        }
        let r = gpd.group().membership_residual(m);
        if r > 1e-9 {
            return Err(Error::NotABisection(format!("matrix is not in {} (residual {r:e})", gpd.group().name())));
        }
        Ok(Self::from_node(gpd.clone().into(), Node::Constant(gpd.arrow(m))))
    }

    /// `x ↦ A(s·X(x))`, the chart curve through the unit in direction `X`.
    /// Not validated; see [`Bisection::diagnostics`].
    pub fn addition(gpd: GroupoidDescriptor, section: AlgebroidSection, scale: f64, addition: LocalAddition) -> Self {
        Self::from_node(gpd, Node::Addition { section, scale, addition })
    }

    pub(crate) fn flow(gpd: GroupoidDescriptor, slice: FlowSlice) -> Self {
        Self::from_node(gpd, Node::Flow(slice))
    }

    pub(crate) fn lift(gpd: GroupoidDescriptor, chart: usize, map: Bisection) -> Self {
        Self::from_node(gpd, Node::Lift { chart, map })
    }

    /// Install a precomputed grid form.
    pub(crate) fn with_grid_form(self, form: GridForm) -> Self {
        let cache = OnceLock::new();
        let _ = cache.set(Ok(form));
        Bisection { cache: Arc::new(cache), ..self }
    }

    /// Use `n` points per axis for the grid form.
    pub fn with_grid(self, n: usize) -> Self {
        let n = if self.gpd.base().dim() == 0 { 1 } else { n.max(2) };
        Bisection { grid_n: n, cache: Arc::new(OnceLock::new()), ..self }
    }

    pub fn groupoid(&self) -> &GroupoidDescriptor {
        &self.gpd
    }

    pub fn grid_size(&self) -> usize {
        self.grid_n
    }

    fn validated(self) -> Result<Self> {
        let d = self.diagnostics();
        if d.valid {
            Ok(self)
        } else {
            Err(Error::NotABisection(d.reason.unwrap_or_default()))
        }
    }

    fn same_groupoid(&self, other: &Bisection) -> Result<()> {
        if self.gpd.name() != other.gpd.name() || self.gpd.coord_dim() != other.gpd.coord_dim() {
            return Err(Error::Precondition(format!(
                "bisections of different groupoids: {} and {}",
                self.gpd.name(),
                other.gpd.name()
            )));
        }
        Ok(())
    }

    /// `(σ ⋆ τ)(x) = σ(β(τ(x)))·τ(x)`.
    pub fn star(&self, tau: &Bisection) -> Result<Self> {
        self.same_groupoid(tau)?;
        let b = Self::from_node(self.gpd.clone(), Node::Star(self.clone(), tau.clone()));
        Ok(Bisection { grid_n: self.grid_n.max(tau.grid_n), ..b })
    }

    /// `σ⁻¹(x) = ι(σ((β∘σ)⁻¹(x)))`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.diagnostics();
        if !d.valid {
            return Err(Error::NotABisection(d.reason.unwrap_or_default()));
        }
        let b = Self::from_node(self.gpd.clone(), Node::Inverse(self.clone()));
        Ok(Bisection { grid_n: self.grid_n, ..b })
    }

    /// `f∘σ` for a morphism `f` over the identity of the base.
    pub fn pushforward(&self, f: &Morphism) -> Result<Self> {
        if f.source().name() != self.gpd.name() {
            return Err(Error::Precondition(format!("morphism from {} applied to a bisection of {}", f.source().name(), self.gpd.name())));
        }
        let b = Self::from_node(f.target().clone(), Node::Pushforward(f.clone(), self.clone()));
        let b = Bisection { grid_n: self.grid_n, ..b };
        let d = b.diagnostics();
        if !d.valid {
            return Err(Error::MorphismDegeneracy(d.reason.unwrap_or_default()));
        }
        Ok(b)
    }

    /// `σ(x)`.
    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<Arrow<S>> {
        let gpd = &self.gpd;
        match &*self.node {
            Node::Unit => Ok(gpd.unit(x)),
            Node::Map(m) => {
                let pair = gpd.as_pair().expect("base maps are pair bisections");
                Ok(pair.arrow(&m.eval(x)?, x))
            }
            Node::Constant(a) => Ok(a.lift()),
            Node::Addition { section, scale, addition } => {
                let u = gpd.unit(x);
                let v: Vec<S> = section.eval_in(gpd, x, u.chart)?.into_iter().map(|c| c.scale(*scale)).collect();
                addition.apply(&u, &v)
            }
            Node::Star(sigma, tau) => {
                let t = tau.eval(x)?;
                let s = sigma.eval(&gpd.target(&t))?;
                gpd.compose(&s, &t)
            }
            Node::Inverse(sigma) => {
                let z = sigma.solve_beta(x)?;
                Ok(gpd.invert(&sigma.eval(&z)?))
            }
            Node::Pushforward(f, sigma) => f.apply(&sigma.eval(x)?),
            Node::Flow(slice) => crate::flow::flow_from_unit(gpd, slice, x),
            Node::Lift { chart, map } => lift_eval(gpd, *chart, map, x),
        }
    }

    /// `β(σ(x))`.
    pub fn beta<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.gpd.target(&self.eval(x)?))
    }

    /// Jacobian of `β∘σ` at a real point, by duals.
    pub fn beta_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = x.len();
        let mut jac = vec![vec![0.0; d]; d];
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            let b = self.beta(&seed(x, &e))?;
            for (i, bi) in b.iter().enumerate() {
                jac[i][k] = bi.deriv;
            }
        }
        Ok(jac)
    }

    /// `(β∘σ)⁻¹(x)`: Newton on the real part, then chord steps with the real
    /// Jacobian to carry the infinitesimal parts of `x` through.
    fn solve_beta<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let base = self.gpd.base();
        let d = base.dim();
        if d == 0 {
            return Ok(vec![]);
        }
        let xv: Vec<f64> = x.iter().map(|c| c.value()).collect();
        let z0 = if d == 1 {
            let failed = std::cell::Cell::new(None);
            let z = invert_circle_diffeo(
                |z| match self.beta(&[z]) {
                    Ok(b) => b[0],
                    Err(e) => {
                        failed.set(Some(e));
                        Dual::new(f64::NAN, f64::NAN)
                    }
                },
                xv[0],
                INVERSE_TOL,
                NEWTON_MAX_ITER,
            );
            if let Some(e) = failed.take() {
                return Err(e);
            }
            vec![z?]
        } else {
            let xl: Vec<Dual> = xv.iter().map(|&c| Dual::constant(c)).collect();
            let b0 = self.beta(&xv)?;
            let start: Vec<f64> = xv.iter().zip(base.difference(&xv, &b0)).map(|(x, e)| x - e).collect();
            newton_solve(|z| Ok(base.difference(&xl, &self.beta(z)?)), &start, INVERSE_TOL, NEWTON_MAX_ITER)?
        };
        let jac = self.beta_jacobian(&z0)?;
        let jinv = Mat::from_vec(d, jac.iter().flatten().copied().collect())
            .inverse()
            .ok_or_else(|| Error::NotABisection("singular β-map Jacobian".into()))?;
        let mut z: Vec<S> = z0.iter().map(|&c| S::from_f64(c)).collect();
        for _ in 0..CHORD_STEPS {
            let e = base.difference(x, &self.beta(&z)?);
            z = (0..d).map(|i| z[i] - (0..d).fold(S::zero(), |acc, k| acc + e[k].scale(jinv[(i, k)]))).collect();
        }
        Ok(z)
    }

    /// Left translation `ψ(β(g))·g`.
    pub fn act<S: Scalar>(&self, g: &Arrow<S>) -> Result<Arrow<S>> {
        let v = self.eval(&self.gpd.target(g))?;
        self.gpd.compose(&v, g)
    }

    /// Orientation-preserving diffeomorphism test on the grid.
    pub fn diagnostics(&self) -> BisectionDiagnostics {
        match self.grid_form() {
            Ok(form) => diagnose(&self.gpd, form, self.grid_n),
            Err(e) => BisectionDiagnostics {
                valid: false,
                alpha_residual: f64::NAN,
                min_derivative: f64::NAN,
                degree: vec![],
                reason: Some(format!("evaluation failed: {e}")),
            },
        }
    }

    pub fn is_bisection(&self) -> bool {
        self.diagnostics().valid
    }

    pub fn grid_form(&self) -> Result<&GridForm> {
        match self.cache.get_or_init(|| self.compute_grid_form()) {
            Ok(f) => Ok(f),
            Err(e) => Err(e.clone()),
        }
    }

    fn compute_grid_form(&self) -> Result<GridForm> {
        let base = self.gpd.base();
        let points = base.grid(self.grid_n);
        let d = base.dim();
        let mut form = GridForm { points: Vec::new(), arrows: Vec::new(), beta: Vec::new(), jacobian: Vec::new() };
        for x in points {
            if d == 0 {
                form.arrows.push(self.eval(&x)?);
                form.beta.push(vec![]);
                form.jacobian.push(vec![]);
            } else {
                let mut jac = vec![vec![0.0; d]; d];
                for k in 0..d {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    let a: Arrow<Dual> = self.eval(&seed(&x, &e))?;
                    let b = self.gpd.target(&a);
                    for (i, bi) in b.iter().enumerate() {
                        jac[i][k] = bi.deriv;
                    }
                    if k == 0 {
                        form.arrows.push(a.values());
                        form.beta.push(b.iter().map(|c| c.value).collect());
                    }
                }
                form.jacobian.push(jac);
            }
            form.points.push(x);
        }
        Ok(form)
    }

    /// `max_x d(σ(x), τ(x))` over the grid of `self`.
    pub fn sup_distance(&self, other: &Bisection) -> Result<f64> {
        self.same_groupoid(other)?;
        let form = self.grid_form()?;
        let mut worst: f64 = 0.0;
        for (x, a) in form.points.iter().zip(&form.arrows) {
            worst = worst.max(self.gpd.distance(a, &other.eval(x)?));
        }
        Ok(worst)
    }

    /// Re-express a pair-groupoid bisection through grid samples of its displacement.
    pub fn to_sampled(&self) -> Result<Bisection> {
        let base = self.gpd.base();
        if self.gpd.as_pair().is_none() {
            return Err(Error::Precondition("sampled form is defined for pair groupoids".into()));
        }
        let form = self.grid_form()?;
        let d = base.dim();
        let fns = (0..d)
            .map(|i| {
                let samples = form.points.iter().zip(&form.beta).map(|(x, b)| wrap_pi(b[i] - x[i])).collect();
                PeriodicGridFunction::from_samples(d, self.grid_n, samples)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_map(base, BaseMap::Grid(fns)).map(|b| b.with_grid(self.grid_n))
    }
}

fn lift_eval<S: Scalar>(gpd: &GroupoidDescriptor, i: usize, map: &Bisection, x: &[S]) -> Result<Arrow<S>> {
    let gauge = gpd.as_gauge().expect("lifts are gauge bisections");
    let y = map.beta(x)?[0];
    let b = gauge.bundle();
    let arc = b.cover().arcs[i];
    let moved = wrap_pi(y.value() - x[0].value()).abs() > LIFT_IDENTITY_TOL;
    if !moved && !b.partition().in_support(i, x[0].value()) {
        return Ok(gpd.unit(x));
    }
    if !(arc.contains(x[0].value()) && arc.contains(y.value())) {
        return Err(Error::Support(format!("factor moves {:.6} outside arc {i}", x[0].value())));
    }
    gauge.arrow(i, i, y, x[0], &b.group().identity())
}

/// Displacements below this count as the identity when lifting localised maps.
pub const LIFT_IDENTITY_TOL: f64 = 1e-13;

fn diagnose(gpd: &GroupoidDescriptor, form: &GridForm, n: usize) -> BisectionDiagnostics {
    let d = gpd.base().dim();
    let alpha_residual = form
        .points
        .iter()
        .zip(&form.arrows)
        .fold(0.0f64, |m, (x, a)| m.max(gpd.base_distance(&gpd.source(a), x)));
    let mut diag = BisectionDiagnostics { valid: true, alpha_residual, min_derivative: 1.0, degree: vec![], reason: None };
    if alpha_residual > ALPHA_TOL {
        diag.valid = false;
        diag.reason = Some(format!("α∘σ differs from the identity by {alpha_residual:e}"));
        return diag;
    }
    if d == 0 {
        return diag;
    }
    diag.min_derivative = f64::INFINITY;
    for (p, jac) in form.jacobian.iter().enumerate() {
        let m = if d == 1 { jac[0][0] } else { Mat::from_vec(d, jac.iter().flatten().copied().collect()).determinant() };
        if m < diag.min_derivative {
            diag.min_derivative = m;
            if m <= DIFFEO_EPS && diag.reason.is_none() {
                diag.reason = Some(format!("β-map degenerates at {:?} (value {m:e})", form.points[p]));
            }
        }
    }
    // Winding along each axis through the first grid point.
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let mut w = vec![0.0; d];
        for k in 0..n {
            let a = &form.beta[k * stride];
            let b = &form.beta[((k + 1) % n) * stride];
            for i in 0..d {
                w[i] += wrap_pi(b[i] - a[i]);
            }
        }
        for (i, wi) in w.iter().enumerate() {
            let expect = if i == axis { TAU } else { 0.0 };
            if (wi - expect).abs() > 1e-6 && diag.reason.is_none() {
                diag.reason = Some(format!("β-map has winding {:.6} along axis {axis} in component {i}", wi / TAU));
            }
        }
        diag.degree.push(w[axis] / TAU);
    }
    diag.valid = diag.reason.is_none();
    diag
}

/// A vertical vector field along a bisection, sampled on a grid.
#[derive(Clone, Debug)]
pub struct VerticalSection {
    pub base: Bisection,
    pub points: Vec<Vec<f64>>,
    /// `σ(x)` for each grid point.
    pub anchors: Vec<Arrow>,
    /// Vector at `σ(x)` in the chart of `anchors[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl VerticalSection {
    /// `max |Tα(v(x))|`.
    pub fn verticality(&self) -> f64 {
        let gpd = self.base.groupoid();
        self.anchors
            .iter()
            .zip(&self.vectors)
            .map(|(a, v)| split(&gpd.source(&a.seeded(v))).1.iter().fold(0.0f64, |m, c| m.max(c.abs())))
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// `A(v(x))` at every grid point.
    pub fn apply(&self, a: &LocalAddition) -> Result<Vec<Arrow>> {
        self.anchors.iter().zip(&self.vectors).map(|(g, v)| a.apply(g, v)).collect()
    }
}

/// The chart of `Bis(G)` at `anchor`: `τ ↦ (x ↦ (π × A)⁻¹(anchor(x), τ(x)))`.
pub fn chart_phi(anchor: &Bisection, tau: &Bisection, a: &LocalAddition) -> Result<VerticalSection> {
    let points = anchor.grid_form()?.points.clone();
    chart_phi_at(anchor, tau, a, &points)
}

/// [`chart_phi`] at chosen base points.
pub fn chart_phi_at(anchor: &Bisection, tau: &Bisection, a: &LocalAddition, points: &[Vec<f64>]) -> Result<VerticalSection> {
    anchor.same_groupoid(tau)?;
    if a.adapted() != Some(crate::groupoid::Side::Source) {
        return Err(Error::Precondition("charts of Bis(G) need a source-adapted addition".into()));
    }
    let gpd = anchor.groupoid();
    let mut out = VerticalSection { base: anchor.clone(), points: Vec::new(), anchors: Vec::new(), vectors: Vec::new() };
    for x in points {
        let g = anchor.eval(x)?;
        let t = tau.eval(x)?;
        let v = a.inverse(gpd, &g, &t).map_err(|e| Error::OutOfChart(format!("at x = {x:?}: {e}")))?;
        out.points.push(x.clone());
        out.anchors.push(g);
        out.vectors.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{GaugeGroupoid, PrincipalBundle};
    use crate::manifolds::MatrixGroup;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair() -> GroupoidDescriptor {
        PairGroupoid::circle().into()
    }

    #[test]
    fn star_is_composition() {
        let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
        let g = Bisection::circle_map("x + 0.2*cos(2*x) + 1").unwrap();
        let fg = f.star(&g).unwrap();
        for x in [0.1, 1.3, 4.0, 6.0] {
            let expect = {
                let y: f64 = x + 0.2 * (2.0 * x).cos() + 1.0;
                y + 0.3 * y.sin()
            };
            let got = fg.beta(&[x]).unwrap()[0];
            assert!(wrap_pi(got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_laws() {
        let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
        let fi = f.inverse().unwrap();
        let one = Bisection::unit(pair());
        assert!(f.star(&fi).unwrap().sup_distance(&one).unwrap() < 1e-12);
        assert!(fi.star(&f).unwrap().sup_distance(&one).unwrap() < 1e-12);
        assert!(fi.is_bisection());
    }

    #[test]
    fn inverse_has_dual_derivatives() {
        let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
        let fi = f.inverse().unwrap();
        let y = 2.0;
        let z = fi.beta(&[y]).unwrap()[0];
        let d = fi.beta(&[Dual::variable(y)]).unwrap()[0].deriv;
        assert!((d - 1.0 / (1.0 + 0.3 * z.cos())).abs() < 1e-13);
        let dd = fi.beta(&[Dual::variable(Dual::variable(y))]).unwrap()[0].deriv.deriv;
        let fp = 1.0 + 0.3 * z.cos();
        let expect = 0.3 * z.sin() / fp.powi(3);
        assert!((dd - expect).abs() < 1e-11, "{dd} vs {expect}");
    }

    #[test]
    fn diffeomorphism_test() {
        assert!(Bisection::circle_map("x + 1.5*sin(x)").is_err());
        let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
        assert!((f.diagnostics().min_derivative - 0.7).abs() < 1e-3);
        assert!(Bisection::circle_map("2*x").is_err());
        let u = Bisection::unit(pair()).diagnostics();
        assert!(u.valid && (u.min_derivative - 1.0).abs() < 1e-15);
    }

    #[test]
    fn act_on_pair() {
        let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
        let p = PairGroupoid::circle();
        let g = p.arrow(&[2.0], &[5.0]);
        let r = f.act(&g).unwrap();
        assert!((r.coords[0] - (2.0 + 0.3 * 2f64.sin())).abs() < 1e-14);
        assert_eq!(r.coords[1], 5.0);
    }

    #[test]
    fn group_inverse_is_transpose() {
        let gp = GroupOverPoint::new(MatrixGroup::SO3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MatrixGroup::SO3.random_element(&mut rng);
        let s = Bisection::constant(&gp, &m).unwrap();
        let si = s.inverse().unwrap().eval::<f64>(&[]).unwrap();
        let mt = m.transpose();
        assert!(si.coords.iter().zip(mt.as_slice()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn torus_bisections() {
        let base = BaseManifold::Torus(2);
        let m = BaseMap::Expr(vec![
            Expr::parse("x1 + 0.2*sin(x2)", &["x1", "x2"]).unwrap(),
            Expr::parse("x2 + 0.1*cos(x1) + 0.5", &["x1", "x2"]).unwrap(),
        ]);
        let f = Bisection::from_map(base, m).unwrap();
        let one = Bisection::unit(PairGroupoid::new(base));
        let err = f.star(&f.inverse().unwrap()).unwrap().sup_distance(&one).unwrap();
        assert!(err < 1e-12, "{err:e}");
        let swap = BaseMap::Expr(vec![Expr::parse("x2", &["x1", "x2"]).unwrap(), Expr::parse("x1", &["x1", "x2"]).unwrap()]);
        assert!(Bisection::from_map(base, swap).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let gg = GaugeGroupoid::new(PrincipalBundle::reference());
        let gpd: GroupoidDescriptor = gg.into();
        let a = LocalAddition::for_groupoid(&gpd);
        let x = AlgebroidSection::gauge_uniform(&gpd, "0.2*sin(x)", &["0.3", "0.1*cos(x)", "0.2"]).unwrap();
        let tau = Bisection::addition(gpd.clone(), x, 1.0, a.clone()).with_grid(32);
        let one = Bisection::unit(gpd.clone()).with_grid(32);
        let vs = chart_phi(&one, &tau, &a).unwrap();
        assert!(vs.verticality() < 1e-10);
        for (t, p) in vs.apply(&a).unwrap().iter().zip(&vs.points) {
            assert!(gpd.distance(t, &tau.eval(p).unwrap()) < 1e-10);
        }
        let zero = chart_phi(&tau, &tau, &a).unwrap();
        assert!(zero.sup_norm() < 1e-12);
    }

    #[test]
    fn sampled_form_agrees() {
        let f = Bisection::circle_map("x + 0.3*sin(x) + 0.1*cos(3*x)").unwrap();
        let s = f.to_sampled().unwrap();
        assert!(f.sup_distance(&s).unwrap() < 1e-12);
        assert!(s.eval(&[0.123]).is_ok());
    }
}
