//! The Lie algebroid `L(G)`: vertical vectors at units, their right-invariant
//! extensions, and the two brackets.
//!
//! Vectors at `1_x` are expressed in the chart coordinates of the unit arrow
//! (pair: `[ẏ, ẋ]` with `ẋ = 0`; groups: ambient matrix entries; gauge:
//! `[ẏ, ẋ, ḣ]` in chart `(i, i)`). The algebroid bracket is
//! `D(→Y)·→X − D(→X)·→Y` at the unit, with Jacobians from duals; the group bracket
//! is the mixed central difference of a bisection commutator.

use crate::bisection::{chart_phi_at, Bisection};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::groupoid::{right_translate, seed_point, Arrow, Chart, Groupoid, GroupoidDescriptor, Morphism};
use crate::local_addition::LocalAddition;
use crate::numerics::dual::split;
use crate::numerics::{Dual, Mat, PeriodicGridFunction, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Default step of the group-bracket difference quotient.
pub const BRACKET_STEP: f64 = 1e-3;

/// Variable names of base coordinates in section expressions.
pub fn base_vars(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["x".into()]
    } else {
        (1..=d).map(|k| format!("x{k}")).collect()
    }
}

fn parse_all(src: &[&str], d: usize) -> Result<Vec<Expr>> {
    let names = base_vars(d);
    let vars: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    src.iter().map(|s| Expr::parse(s, &vars)).collect()
}

/// A section of `L(G)`.
#[derive(Clone, Debug)]
pub enum AlgebroidSection {
    Zero,
    /// Pair groupoid: `v(x)·∂_y` at `(x, x)`.
    Pair(Vec<Expr>),
    /// Fixed coordinates at the unit of a one-point base.
    Fixed(Vec<f64>),
    /// Gauge groupoid or group bundle: anchor `a(x)` and algebra coefficients
    /// `ξ_l(x)` in each chart `(l, l)`, glued by the partition of unity.
    Gauge { anchor: Expr, pieces: Vec<Vec<Expr>> },
    /// Unit-chart coordinates sampled on a grid; needs a single chart.
    Tabulated(Vec<PeriodicGridFunction>),
    Linear(Vec<(f64, AlgebroidSection)>),
    /// `Tf∘X` for a morphism `f` over the identity.
    Pushforward(Arc<Morphism>, Box<AlgebroidSection>),
}

impl AlgebroidSection {
    /// `v(x)·∂_y` with one expression per base coordinate.
    pub fn pair(gpd: &GroupoidDescriptor, v: &[&str]) -> Result<Self> {
        let d = gpd.base().dim();
        if gpd.as_pair().is_none() || v.len() != d {
            return Err(Error::Precondition(format!("pair sections need {d} expressions on a pair groupoid")));
        }
        Ok(AlgebroidSection::Pair(parse_all(v, d)?))
    }

    /// Constant section `V ∈ 𝔥` of a group.
    pub fn constant(gpd: &GroupoidDescriptor, v: &Mat) -> Result<Self> {
        let grp = gpd.as_group().ok_or_else(|| Error::Precondition("constant sections live on groups".into()))?;
        let g = grp.group();
        if v.dim() != g.n() {
            return Err(Error::Precondition("matrix size does not match the group".into()));
        }
        let proj = g.hat(&g.vee(v));
        if (&proj - v).max_abs() > 1e-12 {
            return Err(Error::Precondition(format!("matrix is not in the Lie algebra of {}", g.name())));
        }
        Ok(AlgebroidSection::Fixed(v.as_slice().to_vec()))
    }

    /// Gauge section with its own algebra coefficients in every chart.
    pub fn gauge(gpd: &GroupoidDescriptor, anchor: &str, pieces: &[Vec<&str>]) -> Result<Self> {
        let (cover_len, dim, bundle_kind) = match gpd {
            GroupoidDescriptor::Gauge(g) => (g.bundle().cover().len(), g.bundle().group().algebra_dim(), false),
            GroupoidDescriptor::GroupBundle(g) => (g.bundle().cover().len(), g.bundle().group().algebra_dim(), true),
            _ => return Err(Error::Precondition("gauge sections need a gauge groupoid or group bundle".into())),
        };
        if pieces.len() != cover_len || pieces.iter().any(|p| p.len() != dim) {
            return Err(Error::Precondition(format!("need {cover_len} pieces of {dim} coefficients")));
        }
        let anchor = Expr::parse(anchor, &["x"])?;
        if bundle_kind && anchor != Expr::Const(0.0) {
            return Err(Error::Precondition("group bundle sections have zero anchor".into()));
        }
        let pieces = pieces.iter().map(|p| parse_all(p, 1)).collect::<Result<Vec<_>>>()?;
        Ok(AlgebroidSection::Gauge { anchor, pieces })
    }

    /// Gauge section with the same coefficient expressions in every chart.
    pub fn gauge_uniform(gpd: &GroupoidDescriptor, anchor: &str, xi: &[&str]) -> Result<Self> {
        let n = match gpd {
            GroupoidDescriptor::Gauge(g) => g.bundle().cover().len(),
            GroupoidDescriptor::GroupBundle(g) => g.bundle().cover().len(),
            _ => 0,
        };
        Self::gauge(gpd, anchor, &vec![xi.to_vec(); n.max(1)])
    }

    /// A random smooth section with coefficients of size about `scale`.
    pub fn random(gpd: &GroupoidDescriptor, rng: &mut (impl Rng + ?Sized), scale: f64) -> Self {
        let mut trig = |var: &str| {
            let (a, b, c): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let k = rng.gen_range(1..=2);
            format!("{} + {}*sin({k}*{var}) + {}*cos({var})", c * scale, a * scale, b * scale)
        };
        match gpd {
            GroupoidDescriptor::Pair(p) => {
                let d = p.base().dim();
                let names = base_vars(d);
                let srcs: Vec<String> = (0..d).map(|k| trig(&names[(k + 1) % d])).collect();
                let refs: Vec<&str> = srcs.iter().map(|s| s.as_str()).collect();
                Self::pair(gpd, &refs).expect("generated expressions parse")
            }
            GroupoidDescriptor::Group(g) => {
                let v = g.group().random_algebra(rng, scale);
                AlgebroidSection::Fixed(v.into_vec())
            }
            GroupoidDescriptor::Gauge(_) | GroupoidDescriptor::GroupBundle(_) => {
                let (n, dim) = match gpd {
                    GroupoidDescriptor::Gauge(g) => (g.bundle().cover().len(), g.bundle().group().algebra_dim()),
                    GroupoidDescriptor::GroupBundle(g) => (g.bundle().cover().len(), g.bundle().group().algebra_dim()),
                    _ => unreachable!(),
                };
                let anchor = if matches!(gpd, GroupoidDescriptor::Gauge(_)) { trig("x") } else { "0".into() };
                let pieces: Vec<Vec<String>> = (0..n).map(|_| (0..dim).map(|_| trig("x")).collect()).collect();
                let refs: Vec<Vec<&str>> = pieces.iter().map(|p| p.iter().map(|s| s.as_str()).collect()).collect();
                Self::gauge(gpd, &anchor, &refs).expect("generated expressions parse")
            }
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        AlgebroidSection::Linear(vec![(c, self)])
    }

    pub fn plus(self, other: AlgebroidSection) -> Self {
        AlgebroidSection::Linear(vec![(1.0, self), (1.0, other)])
    }

    pub fn pushforward(self, f: &Morphism) -> Self {
        AlgebroidSection::Pushforward(Arc::new(f.clone()), Box::new(self))
    }

    /// `X(x)` as a vector at the unit `1_x` taken in `chart`.
    pub fn eval_in<S: Scalar>(&self, gpd: &GroupoidDescriptor, x: &[S], chart: Chart) -> Result<Vec<S>> {
        let n = gpd.coord_dim();
        match self {
            AlgebroidSection::Zero => Ok(vec![S::zero(); n]),
            AlgebroidSection::Pair(v) => {
                let mut out: Vec<S> = v.iter().map(|e| e.eval(x)).collect();
                out.resize(n, S::zero());
                Ok(out)
            }
            AlgebroidSection::Fixed(v) => Ok(v.iter().map(|&c| S::from_f64(c)).collect()),
            AlgebroidSection::Tabulated(fs) => Ok(fs.iter().map(|f| f.eval(x)).collect()),
            AlgebroidSection::Gauge { anchor, pieces } => gauge_eval(gpd, anchor, pieces, x, chart),
            AlgebroidSection::Linear(terms) => {
                let mut out = vec![S::zero(); n];
                for (c, s) in terms {
                    for (o, v) in out.iter_mut().zip(s.eval_in(gpd, x, chart)?) {
                        *o += v.scale(*c);
                    }
                }
                Ok(out)
            }
            AlgebroidSection::Pushforward(f, inner) => {
                let src = f.source();
                let u = src.unit(x);
                let v = inner.eval_in(src, x, u.chart)?;
                let img = f.apply(&seed_point(&u, &v))?;
                Ok(gpd.to_chart(&img, chart)?.split().1)
            }
        }
    }

    /// `X(x)` at the unit in its default chart.
    pub fn at(&self, gpd: &GroupoidDescriptor, x: &[f64]) -> Result<(Arrow, Vec<f64>)> {
        let u = gpd.unit(x);
        let v = self.eval_in(gpd, x, u.chart)?;
        Ok((u, v))
    }

    /// Largest `|Tα(X(x))|` over grid points.
    pub fn verticality(&self, gpd: &GroupoidDescriptor, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in gpd.base().grid(n) {
            let (u, v) = self.at(gpd, &x)?;
            let ta = split(&gpd.source(&u.seeded(&v))).1;
            worst = ta.iter().fold(worst, |m, c| m.max(c.abs()));
        }
        Ok(worst)
    }
}

fn gauge_eval<S: Scalar>(gpd: &GroupoidDescriptor, anchor: &Expr, pieces: &[Vec<Expr>], x: &[S], chart: Chart) -> Result<Vec<S>> {
    let (bundle, group_bundle) = match gpd {
        GroupoidDescriptor::Gauge(g) => (g.bundle(), false),
        GroupoidDescriptor::GroupBundle(g) => (g.bundle(), true),
        _ => return Err(Error::Precondition("gauge section on a non-gauge groupoid".into())),
    };
    let grp = bundle.group();
    let pou = bundle.partition();
    let a = anchor.eval(x);
    let mut out = vec![S::zero(); gpd.coord_dim()];
    for (l, piece) in pieces.iter().enumerate() {
        let w = pou.eval(l, x[0]);
        if w.value() == 0.0 {
            continue;
        }
        let xi: Vec<S> = piece.iter().map(|e| e.eval(x)).collect();
        let h = grp.hat(&xi);
        let local = Chart::Arcs { target: l, source: l };
        let (u, v) = if group_bundle {
            let gb = gpd_group_bundle(gpd);
            let u = gb.arrow(l, x[0], &grp.identity())?;
            let mut v = vec![S::zero()];
            v.extend(h.into_vec());
            (u, v)
        } else {
            let gg = gpd.as_gauge().expect("gauge groupoid");
            let u = gg.arrow(l, l, x[0], x[0], &grp.identity())?;
            let mut v = vec![a, S::zero()];
            v.extend(h.into_vec());
            (u, v)
        };
        let conv = if local == chart { v } else { gpd.to_chart(&seed_point(&u, &v), chart)?.split().1 };
        for (o, c) in out.iter_mut().zip(conv) {
            *o += w * c;
        }
    }
    Ok(out)
}

fn gpd_group_bundle(gpd: &GroupoidDescriptor) -> &crate::groupoid::GroupBundle {
    match gpd {
        GroupoidDescriptor::GroupBundle(g) => g,
        _ => unreachable!("checked by caller"),
    }
}

/// `Tβ(X(x))`.
pub fn anchor<S: Scalar>(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, x: &[S]) -> Result<Vec<S>> {
    let u = gpd.unit(x);
    let v = x_sec.eval_in(gpd, x, u.chart)?;
    Ok(split(&gpd.target(&seed_point(&u, &v))).1)
}

/// `→X(g) = T R_g(X(β(g)))`.
pub fn right_invariant_extension<S: Scalar>(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, g: &Arrow<S>) -> Result<Vec<S>> {
    let y = gpd.target(g);
    let chart = gpd.target_unit_chart(&g.chart);
    let u = gpd.unit_in(&y, chart)?;
    let v = x_sec.eval_in(gpd, &y, chart)?;
    right_translate(gpd, &u, &v, g)
}

/// `[X, Y](x)` at the unit `1_x`, in the chart of that unit.
pub fn bracket_at(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, y_sec: &AlgebroidSection, x: &[f64]) -> Result<(Arrow, Vec<f64>)> {
    let u = gpd.unit(x);
    let a = x_sec.eval_in(gpd, x, u.chart)?;
    let b = y_sec.eval_in(gpd, x, u.chart)?;
    let dy: Vec<Dual> = right_invariant_extension(gpd, y_sec, &u.seeded(&a))?;
    let dx: Vec<Dual> = right_invariant_extension(gpd, x_sec, &u.seeded(&b))?;
    let v = dy.iter().zip(&dx).map(|(p, q)| p.deriv - q.deriv).collect();
    Ok((u, v))
}

/// Grid samples of a section at units, each in the default unit chart.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSection {
    pub points: Vec<Vec<f64>>,
    pub charts: Vec<Chart>,
    pub vectors: Vec<Vec<f64>>,
}

impl SampledSection {
    pub fn sample(gpd: &GroupoidDescriptor, sec: &AlgebroidSection, n: usize) -> Result<Self> {
        let mut s = SampledSection { points: vec![], charts: vec![], vectors: vec![] };
        for x in gpd.base().grid(n) {
            let (u, v) = sec.at(gpd, &x)?;
            s.charts.push(u.chart);
            s.vectors.push(v);
            s.points.push(x);
        }
        Ok(s)
    }

    /// Largest componentwise difference; both samples must share points and charts.
    pub fn sup_distance(&self, other: &SampledSection) -> Result<f64> {
        if self.points != other.points || self.charts != other.charts {
            return Err(Error::Precondition("samples taken on different grids or charts".into()));
        }
        Ok(self
            .vectors
            .iter()
            .zip(&other.vectors)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max))
    }

    pub fn sup_norm(&self) -> f64 {
        self.vectors.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn combine(&self, c: f64, other: &SampledSection) -> Result<SampledSection> {
        self.sup_distance(other)?;
        let vectors = self.vectors.iter().zip(&other.vectors).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + c * q).collect()).collect();
        Ok(SampledSection { vectors, ..self.clone() })
    }

    /// Interpolating section; needs a single chart and a full grid.
    pub fn to_section(&self, gpd: &GroupoidDescriptor) -> Result<AlgebroidSection> {
        if !gpd.has_global_chart() {
            return Err(Error::BracketChart(format!("{} has no global chart for tabulation", gpd.name())));
        }
        let d = gpd.base().dim();
        if d == 0 {
            return Ok(AlgebroidSection::Fixed(self.vectors[0].clone()));
        }
        let n = (self.points.len() as f64).powf(1.0 / d as f64).round() as usize;
        (0..gpd.coord_dim())
            .map(|c| PeriodicGridFunction::from_samples(d, n, self.vectors.iter().map(|v| v[c]).collect()))
            .collect::<Result<Vec<_>>>()
            .map(AlgebroidSection::Tabulated)
    }
}

/// `[X, Y]` sampled at the units over the grid.
pub fn bracket_samples(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, y_sec: &AlgebroidSection, n: usize) -> Result<SampledSection> {
    let mut s = SampledSection { points: vec![], charts: vec![], vectors: vec![] };
    for x in gpd.base().grid(n) {
        let (u, v) = bracket_at(gpd, x_sec, y_sec, &x)?;
        s.charts.push(u.chart);
        s.vectors.push(v);
        s.points.push(x);
    }
    Ok(s)
}

/// The algebroid bracket as a tabulated section.
pub fn algebroid_bracket(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, y_sec: &AlgebroidSection, n: usize) -> Result<AlgebroidSection> {
    if !gpd.has_global_chart() {
        return Err(Error::BracketChart(format!("{} needs several charts; use bracket_at", gpd.name())));
    }
    bracket_samples(gpd, x_sec, y_sec, n)?.to_section(gpd)
}

/// The bracket of `L(Bis(G))` from the commutator `σ_s ⋆ τ_t ⋆ σ_s⁻¹ ⋆ τ_t⁻¹`
/// with `σ_s = A(s·X)`, `τ_t = A(t·Y)`, read back through the chart at the unit
/// and differentiated by a mixed central difference with step `h`.
pub fn group_bracket(
    gpd: &GroupoidDescriptor,
    x_sec: &AlgebroidSection,
    y_sec: &AlgebroidSection,
    a: &LocalAddition,
    h: f64,
    n: usize,
) -> Result<SampledSection> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    let curve = |sec: &AlgebroidSection, s: f64| -> Result<Bisection> {
        let b = Bisection::addition(gpd.clone(), sec.clone(), s, a.clone()).with_grid(n);
        let d = b.diagnostics();
        if !d.valid {
            return Err(Error::InvalidStep(h));
        }
        Ok(b)
    };
    let unit = Bisection::unit(gpd.clone()).with_grid(n);
    let points = gpd.base().grid(n);
    let mut corners = Vec::with_capacity(4);
    for (s, t) in [(h, h), (h, -h), (-h, h), (-h, -h)] {
        let sig = curve(x_sec, s)?;
        let tau = curve(y_sec, t)?;
        let c = sig.star(&tau)?.star(&sig.inverse()?)?.star(&tau.inverse()?)?;
        corners.push(chart_phi_at(&unit, &c, a, &points)?);
    }
    let mut out = SampledSection { points: points.clone(), charts: vec![], vectors: vec![] };
    for k in 0..points.len() {
        out.charts.push(corners[0].anchors[k].chart);
        let v = crate::numerics::fd::mixed_difference(
            &corners[0].vectors[k],
            &corners[1].vectors[k],
            &corners[2].vectors[k],
            &corners[3].vectors[k],
            h,
        );
        out.vectors.push(v);
    }
    Ok(out)
}

/// `|φ(A(s·X))/s − X|`: the chart at the unit identifies `L(G)` with `T_1 Bis(G)`.
pub fn phi_residual(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, a: &LocalAddition, s: f64, n: usize) -> Result<f64> {
    let curve = Bisection::addition(gpd.clone(), x_sec.clone(), s, a.clone()).with_grid(n);
    let unit = Bisection::unit(gpd.clone()).with_grid(n);
    let points = gpd.base().grid(n);
    let vs = chart_phi_at(&unit, &curve, a, &points)?;
    let exact = SampledSection::sample(gpd, x_sec, n)?;
    Ok(vs.vectors.iter().zip(&exact.vectors).flat_map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a / s - b).abs())).fold(0.0, f64::max))
}

/// Residuals of the naturality square for a morphism `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalityReport {
    /// `|Tf∘[X,Y] − [f_*X, f_*Y]|` for the algebroid bracket.
    pub algebroid: f64,
    /// The same for the group bracket.
    pub group: f64,
}

/// Push a sampled section at units through `Tf`, re-expressed in the target unit charts.
fn push_samples(f: &Morphism, s: &SampledSection) -> Result<SampledSection> {
    let (src, tgt) = (f.source(), f.target());
    let mut out = SampledSection { points: s.points.clone(), charts: vec![], vectors: vec![] };
    for ((x, c), v) in s.points.iter().zip(&s.charts).zip(&s.vectors) {
        let u = src.unit_in(x, *c)?;
        let img = f.apply(&u.seeded(v))?;
        let chart = tgt.unit(x).chart;
        out.vectors.push(tgt.to_chart(&img, chart)?.split().1);
        out.charts.push(chart);
    }
    Ok(out)
}

pub fn phi_and_naturality_check(
    f: &Morphism,
    x_sec: &AlgebroidSection,
    y_sec: &AlgebroidSection,
    h: f64,
    n: usize,
) -> Result<NaturalityReport> {
    let (src, tgt) = (f.source(), f.target());
    let (fx, fy) = (x_sec.clone().pushforward(f), y_sec.clone().pushforward(f));
    let lhs = push_samples(f, &bracket_samples(src, x_sec, y_sec, n)?)?;
    let rhs = bracket_samples(tgt, &fx, &fy, n)?;
    let algebroid = lhs.sup_distance(&rhs)?;
    let (a_src, a_tgt) = (LocalAddition::for_groupoid(src), LocalAddition::for_groupoid(tgt));
    let lhs = push_samples(f, &group_bracket(src, x_sec, y_sec, &a_src, h, n)?)?;
    let rhs = group_bracket(tgt, &fx, &fy, &a_tgt, h, n)?;
    Ok(NaturalityReport { algebroid, group: lhs.sup_distance(&rhs)? })
}

/// Compare the algebroid bracket of a trivial gauge groupoid with the bracket of
/// the corresponding `H`-invariant vector fields `(a(x), ξ(x)·k)` on `P = S¹ × H`,
/// computed directly in the coordinates of `P`.
pub fn atiyah_residual(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, y_sec: &AlgebroidSection, n: usize) -> Result<f64> {
    let gg = gpd.as_gauge().ok_or_else(|| Error::Precondition("the Atiyah check needs a gauge groupoid".into()))?;
    let b = gg.bundle();
    if !b.is_trivial() || b.cover().len() != 1 {
        return Err(Error::Precondition("the Atiyah check is implemented for the single-chart trivial bundle".into()));
    }
    let hn = b.group().n();
    let chart = Chart::Arcs { target: 0, source: 0 };
    // Invariant field on P at (θ, k): (a(θ), ξ(θ)·k), coordinates [θ, k entries].
    let field = |sec: &AlgebroidSection, p: &[Dual]| -> Result<Vec<Dual>> {
        let v = sec.eval_in(gpd, &p[..1], chart)?;
        let xi = Mat::from_vec(hn, v[2..].to_vec());
        let k = Mat::from_vec(hn, p[1..].to_vec());
        let mut out = vec![v[0]];
        out.extend((&xi * &k).into_vec());
        Ok(out)
    };
    let mut worst: f64 = 0.0;
    for x in gpd.base().grid(n) {
        let mut p = vec![x[0]];
        p.extend(Mat::<f64>::identity(hn).into_vec());
        let pl: Vec<Dual> = p.iter().map(|&c| Dual::constant(c)).collect();
        let fx: Vec<f64> = field(x_sec, &pl)?.iter().map(|c| c.value).collect();
        let fy: Vec<f64> = field(y_sec, &pl)?.iter().map(|c| c.value).collect();
        let dy = field(y_sec, &crate::numerics::dual::seed(&p, &fx))?;
        let dx = field(x_sec, &crate::numerics::dual::seed(&p, &fy))?;
        let on_p: Vec<f64> = dy.iter().zip(&dx).map(|(a, b)| a.deriv - b.deriv).collect();
        let (_, alg) = bracket_at(gpd, x_sec, y_sec, &x)?;
        worst = worst.max((on_p[0] - alg[0]).abs()).max(alg[1].abs());
        for (a, b) in on_p[1..].iter().zip(&alg[2..]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// For `η(t) = A(t·X)`, compare `d/dt act(η(t), g)` at `t = 0` (central difference
/// with step `dt` through the bisection action) with `→X(g)`, over random arrows.
pub fn related_residual(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, a: &LocalAddition, samples: usize, seed: u64, dt: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus = Bisection::addition(gpd.clone(), x_sec.clone(), dt, a.clone());
    let minus = Bisection::addition(gpd.clone(), x_sec.clone(), -dt, a.clone());
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = gpd.random_arrow(&mut rng);
        let p = gpd.difference(&g, &plus.act(&g)?)?;
        let m = gpd.difference(&g, &minus.act(&g)?)?;
        let exact = right_invariant_extension(gpd, x_sec, &g)?;
        let exact = split(&gpd.difference(&g, &g.seeded(&exact))?).1;
        for ((p, m), e) in p.iter().zip(&m).zip(&exact) {
            worst = worst.max(((p - m) / (2.0 * dt) - e).abs());
        }
    }
    Ok(worst)
}

/// `→X(hg) − TR_g(→X(h))` over random composable pairs.
pub fn right_invariance_residual(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = gpd.random_arrow(&mut rng);
        let g = gpd.random_arrow_with_target(&mut rng, &gpd.source(&h));
        let hg = gpd.compose(&h, &g)?;
        let lhs = right_invariant_extension(gpd, x_sec, &hg)?;
        let xh = right_invariant_extension(gpd, x_sec, &h)?;
        let rhs = right_translate(gpd, &h, &xh, &g)?;
        for (a, b) in lhs.iter().zip(&rhs) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// `anchor([X,Y]) − [anchor X, anchor Y]` on the grid, both as vector fields on the base.
pub fn anchor_morphism_residual(gpd: &GroupoidDescriptor, x_sec: &AlgebroidSection, y_sec: &AlgebroidSection, n: usize) -> Result<f64> {
    let d = gpd.base().dim();
    if d == 0 {
        return Ok(0.0);
    }
    let mut worst: f64 = 0.0;
    for x in gpd.base().grid(n) {
        let (u, v) = bracket_at(gpd, x_sec, y_sec, &x)?;
        let lhs = split(&gpd.target(&u.seeded(&v))).1;
        let ax: Vec<f64> = anchor(gpd, x_sec, &x)?;
        let ay: Vec<f64> = anchor(gpd, y_sec, &x)?;
        let day: Vec<Dual> = anchor(gpd, y_sec, &crate::numerics::dual::seed(&x, &ax))?;
        let dax: Vec<Dual> = anchor(gpd, x_sec, &crate::numerics::dual::seed(&x, &ay))?;
        for i in 0..d {
            worst = worst.max((lhs[i] - (day[i].deriv - dax[i].deriv)).abs());
        }
    }
    Ok(worst)
}
