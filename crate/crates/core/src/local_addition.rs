//! Local additions `A: U ⊆ TG → G` on arrow manifolds.
//!
//! A tangent vector at an arrow `g` is given in the chart coordinates of `g`.
//! Every addition is generic over [`Scalar`], so `TA` is available through duals,
//! which is how the flip addition on a tangent bundle is built.

use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Chart, GaugeGroupoid, GroupBundle, Groupoid, GroupoidDescriptor, Point, Side};
use crate::manifolds::MatrixGroup;
use crate::numerics::dual::{seed, split};
use crate::numerics::ode::{rk4_solve, IntegrationParams};
use crate::numerics::root::{newton_solve, NEWTON_MAX_ITER};
use crate::numerics::{Dual, Mat, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

/// Conservative radius for displacements of angular coordinates.
pub const TORUS_RADIUS: f64 = FRAC_PI_2;

/// Drift above which [`check_adapted`] fails.
pub const ADAPTED_TOL: f64 = 1e-10;

pub const INVERSE_TOL: f64 = 1e-13;

/// RK4 steps for parallel transport along base segments.
pub const TRANSPORT_STEPS: usize = 64;

/// Default RK4 step count for spray geodesics.
pub const SPRAY_STEPS: usize = 200;

#[derive(Clone, Debug)]
pub enum LocalAddition {
    /// `c + v`, with the first `angular` coordinates reduced mod 2π.
    Flat { angular: usize },
    /// `A_H(h.V) = h·exp(h⁻¹V)` on a matrix group.
    Group(MatrixGroup),
    /// Chart-wise `A_M × A_M × A_H` after removing the connection part of the vector.
    Gauge(GaugeGroupoid),
    /// The same construction restricted to the group bundle.
    GroupBundle(GroupBundle),
    /// `ι ∘ A ∘ Tι`.
    Opposite { inner: Box<LocalAddition>, gpd: GroupoidDescriptor },
    /// Time-one geodesic of the right-invariant spray.
    Spray { gpd: GroupoidDescriptor, steps: usize },
    /// `TA ∘ τ` on the tangent bundle, in coordinates `[q, w]` with vectors `[a, b]`.
    Flip(Box<LocalAddition>),
}

impl LocalAddition {
    /// The canonical source-adapted addition of a groupoid.
    pub fn for_groupoid(gpd: &GroupoidDescriptor) -> Self {
        match gpd {
            GroupoidDescriptor::Pair(p) => LocalAddition::Flat { angular: p.coord_dim() },
            GroupoidDescriptor::Group(g) => LocalAddition::Group(g.group().clone()),
            GroupoidDescriptor::Gauge(g) => LocalAddition::Gauge(g.clone()),
            GroupoidDescriptor::GroupBundle(g) => LocalAddition::GroupBundle(g.clone()),
        }
    }

    pub fn opposite(inner: LocalAddition, gpd: GroupoidDescriptor) -> Result<Self> {
        if inner.adapted() != Some(Side::Source) {
            return Err(Error::Precondition("the opposite addition needs a source-adapted input".into()));
        }
        Ok(LocalAddition::Opposite { inner: Box::new(inner), gpd })
    }

    pub fn spray(gpd: GroupoidDescriptor, steps: usize) -> Result<Self> {
        match gpd {
            GroupoidDescriptor::Pair(_) | GroupoidDescriptor::Group(_) if steps > 0 => {
                Ok(LocalAddition::Spray { gpd, steps })
            }
            _ if steps == 0 => Err(Error::Precondition("spray needs at least one step".into())),
            _ => Err(Error::Precondition("sprays are implemented for pair groupoids and groups".into())),
        }
    }

    pub fn flip(inner: LocalAddition) -> Result<Self> {
        if matches!(inner, LocalAddition::Flip(_)) {
            return Err(Error::Precondition("flips of flip additions are not modelled".into()));
        }
        Ok(LocalAddition::Flip(Box::new(inner)))
    }

    /// The fibration this addition preserves, as declared by its construction.
    pub fn adapted(&self) -> Option<Side> {
        match self {
            LocalAddition::Opposite { .. } => Some(Side::Target),
            LocalAddition::Flip(_) => None,
            _ => Some(Side::Source),
        }
    }

    pub fn name(&self) -> String {
        match self {
            LocalAddition::Flat { .. } => "flat".into(),
            LocalAddition::Group(g) => format!("group({})", g.name()),
            LocalAddition::Gauge(_) => "gauge".into(),
            LocalAddition::GroupBundle(_) => "group-bundle".into(),
            LocalAddition::Opposite { inner, .. } => format!("opposite({})", inner.name()),
            LocalAddition::Spray { .. } => "spray".into(),
            LocalAddition::Flip(inner) => format!("flip({})", inner.name()),
        }
    }

    /// Whether `v` at `g` lies in the (conservative) domain.
    pub fn in_domain(&self, g: &Arrow, v: &[f64]) -> bool {
        match self {
            LocalAddition::Flat { angular } => v.iter().take(*angular).all(|d| d.abs() < TORUS_RADIUS),
            LocalAddition::Group(grp) => group_algebra_norm(grp, &g.coords, v) < grp.exp_radius(),
            LocalAddition::Spray { gpd, .. } => match gpd {
                GroupoidDescriptor::Group(grp) => {
                    let grp = grp.group();
                    group_algebra_norm(grp, &g.coords, v) < grp.exp_radius()
                }
                _ => v.iter().all(|d| d.abs() < TORUS_RADIUS),
            },
            LocalAddition::Gauge(gg) => gauge_apply(gg, g, v).is_ok(),
            LocalAddition::GroupBundle(gb) => bundle_apply(gb, g, v).is_ok(),
            LocalAddition::Opposite { inner, gpd } => {
                let (gi, w) = gpd.invert(&g.seeded(v)).split();
                inner.in_domain(&gi, &w)
            }
            LocalAddition::Flip(inner) => {
                let n = g.coords.len() / 2;
                inner.in_domain(&Point::new(g.chart, g.coords[..n].to_vec()), &v[..n])
            }
        }
    }

    /// `A(v)` for `v ∈ T_g`.
    pub fn apply<S: Scalar>(&self, g: &Arrow<S>, v: &[S]) -> Result<Arrow<S>> {
        if g.coords.len() != v.len() {
            return Err(Error::Domain(format!("vector of length {} at a point of dimension {}", v.len(), g.coords.len())));
        }
        match self {
            LocalAddition::Flip(inner) => {
                let n = g.coords.len() / 2;
                let base = Point::new(g.chart, seed(&g.coords[..n], &g.coords[n..]));
                let r = inner.apply_unflipped(&base, &seed(&v[..n], &v[n..]))?;
                let (val, der) = split(&r.coords);
                Ok(Point::new(r.chart, val.into_iter().chain(der).collect()))
            }
            _ => self.apply_unflipped(g, v),
        }
    }

    // Kept separate from `apply` so that the flip, which evaluates its inner
    // addition on duals, does not instantiate `apply` at ever deeper dual types.
    fn apply_unflipped<S: Scalar>(&self, g: &Arrow<S>, v: &[S]) -> Result<Arrow<S>> {
        match self {
            LocalAddition::Flat { angular } => {
                let mut c = Vec::with_capacity(v.len());
                for (k, (&a, &d)) in g.coords.iter().zip(v).enumerate() {
                    let s = a + d;
                    if k < *angular {
                        if d.value().abs() >= TORUS_RADIUS {
                            return Err(Error::Domain(format!("displacement {:.4} exceeds π/2", d.value())));
                        }
                        let w = crate::numerics::root::wrap_tau(s.value());
                        c.push(s.shift(w - s.value()));
                    } else {
                        c.push(s);
                    }
                }
                Ok(Point::new(g.chart, c))
            }
            LocalAddition::Group(grp) => group_apply(grp, g, v),
            LocalAddition::Gauge(gg) => gauge_apply(gg, g, v),
            LocalAddition::GroupBundle(gb) => bundle_apply(gb, g, v),
            LocalAddition::Opposite { inner, gpd } => {
                let (gi, w) = gpd.invert(&crate::groupoid::seed_point(g, v)).split();
                Ok(gpd.invert(&inner.apply_unflipped(&gi, &w)?))
            }
            LocalAddition::Spray { gpd, steps } => spray_geodesic(gpd, g, v, 1.0, *steps),
            LocalAddition::Flip(_) => Err(Error::Precondition("flips of flip additions are not modelled".into())),
        }
    }

    /// `(π × A)⁻¹(g, target)`: the vector at `g` whose addition is `target`, by Newton
    /// in the coordinates of the tangent frame of `space` at `g`.
    pub fn inverse(&self, space: &impl Groupoid, g: &Arrow, target: &Arrow) -> Result<Vec<f64>> {
        let basis = space.tangent_basis(g);
        let n = g.coords.len();
        let combine = |c: &[Dual]| -> Vec<Dual> {
            (0..n).map(|i| c.iter().zip(&basis).fold(Dual::constant(0.0), |acc, (ck, b)| acc + ck.scale(b[i]))).collect()
        };
        let gl: Arrow<Dual> = g.lift();
        let c = newton_solve(
            |c| space.difference(target, &self.apply(&gl, &combine(c))?),
            &vec![0.0; basis.len()],
            INVERSE_TOL,
            NEWTON_MAX_ITER,
        )?;
        Ok((0..n).map(|i| c.iter().zip(&basis).map(|(ck, b)| ck * b[i]).sum()).collect())
    }
}

fn matrix_of<S: Scalar>(grp: &MatrixGroup, c: &[S]) -> Mat<S> {
    Mat::from_vec(grp.n(), c.to_vec())
}

fn group_algebra_norm(grp: &MatrixGroup, g: &[f64], v: &[f64]) -> f64 {
    let h = matrix_of(grp, g);
    let hinv = h.inverse().unwrap_or_else(|| grp.inverse(&h));
    grp.algebra_norm(&(&hinv * &matrix_of(grp, v)))
}

fn group_apply<S: Scalar>(grp: &MatrixGroup, g: &Arrow<S>, v: &[S]) -> Result<Arrow<S>> {
    let h = matrix_of(grp, &g.coords);
    let w = &grp.inverse(&h) * &matrix_of(grp, v);
    let norm = grp.algebra_norm(&w.map(|s| s.value()));
    if norm >= grp.exp_radius() {
        return Err(Error::Domain(format!("|V| = {norm:.4} exceeds the exponential radius")));
    }
    Ok(Point::new(g.chart, (&h * &grp.exp(&w)).into_vec()))
}

/// Whether the segment from `p` to `p + d` stays in arc `a` (on its lift).
fn segment_fits(gg: &crate::groupoid::PrincipalBundle, a: usize, p: f64, d: f64) -> bool {
    let arc = gg.cover().arcs[a];
    arc.covers_circle() || (arc.contains(p) && (arc.rep(p) + d - arc.center).abs() < arc.half_width)
}

fn pick_arc(b: &crate::groupoid::PrincipalBundle, current: usize, p: f64, d: f64) -> Result<usize> {
    if d.abs() >= TORUS_RADIUS {
        return Err(Error::Domain(format!("base displacement {d:.4} exceeds π/2")));
    }
    if segment_fits(b, current, p, d) {
        return Ok(current);
    }
    let arcs = &b.cover().arcs;
    b.cover()
        .charts_at(p)
        .into_iter()
        .filter(|&a| segment_fits(b, a, p, d))
        .max_by(|&x, &y| arcs[x].depth(p + d).total_cmp(&arcs[y].depth(p + d)))
        .ok_or_else(|| Error::Domain(format!("no arc contains the segment from {p:.4} by {d:.4}")))
}

fn gauge_apply<S: Scalar>(gg: &GaugeGroupoid, g: &Arrow<S>, v: &[S]) -> Result<Arrow<S>> {
    let (i, j) = gg.charts(&g.chart);
    let b = gg.bundle();
    let m = pick_arc(b, i, g.coords[0].value(), v[0].value())?;
    let n = pick_arc(b, j, g.coords[1].value(), v[1].value())?;
    if (m, n) == (i, j) {
        return gauge_apply_in_chart(gg, g, v, true);
    }
    let chart = Chart::Arcs { target: m, source: n };
    let (gc, vc) = gg.to_chart(&crate::groupoid::seed_point(g, v), chart)?.split();
    gauge_apply_in_chart(gg, &gc, &vc, true)
}

/// Parallel transport `T(1)` along `t ↦ p + t·d` in arc `i`: `T' = −A_i(p + t d)·d·T`,
/// `T(0) = e`. Under a chart change it transforms as `k_mi(p + d)·T·k_mi(p)⁻¹`.
pub fn transport<S: Scalar>(b: &crate::groupoid::PrincipalBundle, i: usize, p: S, d: S) -> Result<Mat<S>> {
    let n = b.group().n();
    if d == S::zero() || b.is_trivial() {
        return Ok(Mat::identity(n));
    }
    let rhs = |t: f64, s: &[S]| -> Result<Vec<S>> {
        let a = b.connection(i, p + d.scale(t))?;
        Ok((&a.scale(-d) * &Mat::from_vec(n, s.to_vec())).into_vec())
    };
    let path = rk4_solve(rhs, Mat::<S>::identity(n).as_slice(), IntegrationParams::new(0.0, 1.0, TRANSPORT_STEPS))?;
    Ok(Mat::from_vec(n, path.last().expect("non-empty path").clone()))
}

/// `A_ij` in the chart of `g`, assuming the base segments stay in its arcs.
///
/// With `transported`, the group part is parallel-transported along the base
/// segments, which makes the chart formulas agree on overlaps.
pub fn gauge_apply_in_chart<S: Scalar>(gg: &GaugeGroupoid, g: &Arrow<S>, v: &[S], transported: bool) -> Result<Arrow<S>> {
    let (i, j) = gg.charts(&g.chart);
    let b = gg.bundle();
    let grp = b.group();
    let (y, x) = (g.coords[0], g.coords[1]);
    let (dy, dx) = (v[0], v[1]);
    if !segment_fits(b, i, y.value(), dy.value()) || !segment_fits(b, j, x.value(), dx.value()) {
        return Err(Error::Domain("base segment leaves the chart".into()));
    }
    let h = gg.h_part(g);
    let dh = Mat::from_vec(grp.n(), v[2..].to_vec());
    let ai = b.connection(i, y)?;
    let aj = b.connection(j, x)?;
    let vh = &(&dh + &(&ai * &h).scale(dy)) - &(&h * &aj).scale(dx);
    let w = &grp.inverse(&h) * &vh;
    let norm = grp.algebra_norm(&w.map(|s| s.value()));
    if norm >= grp.exp_radius() {
        return Err(Error::Domain(format!("|V| = {norm:.4} exceeds the exponential radius")));
    }
    let mut hn = &h * &grp.exp(&w);
    if transported {
        let ty = transport(b, i, y, dy)?;
        let tx = transport(b, j, x, dx)?;
        hn = &(&ty * &hn) * &grp.inverse(&tx);
    }
    let arc_y = b.cover().arcs[i];
    let arc_x = b.cover().arcs[j];
    gg.arrow(i, j, arc_y.rep(y) + dy, arc_x.rep(x) + dx, &hn)
}

fn bundle_apply<S: Scalar>(gb: &GroupBundle, g: &Arrow<S>, v: &[S]) -> Result<Arrow<S>> {
    let Chart::Arcs { target: i, .. } = g.chart else {
        return Err(Error::Precondition("group bundle arrow without arc chart".into()));
    };
    let b = gb.bundle();
    let m = pick_arc(b, i, g.coords[0].value(), v[0].value())?;
    let (g, v) = if m == i {
        (g.clone(), v.to_vec())
    } else {
        gb.to_chart(&crate::groupoid::seed_point(g, v), Chart::Arcs { target: m, source: m })?.split()
    };
    let grp = b.group();
    let x = g.coords[0];
    let dx = v[0];
    let h = gb.h_part(&g);
    let dh = Mat::from_vec(grp.n(), v[1..].to_vec());
    let a = b.connection(m, x)?;
    let vh = &dh + &(&(&a * &h) - &(&h * &a)).scale(dx);
    let w = &grp.inverse(&h) * &vh;
    if grp.algebra_norm(&w.map(|s| s.value())) >= grp.exp_radius() {
        return Err(Error::Domain("group part exceeds the exponential radius".into()));
    }
    let t = transport(b, m, x, dx)?;
    let hn = &(&(&t * &h) * &grp.exp(&w)) * &grp.inverse(&t);
    gb.arrow(m, b.cover().arcs[m].rep(x) + dx, &hn)
}

/// Geodesic of the right-invariant spray from `v ∈ T_g` at time `t`:
/// straight lines on pair groupoids, `g̈ = ġ g⁻¹ ġ` on matrix groups.
pub fn spray_geodesic<S: Scalar>(gpd: &GroupoidDescriptor, g: &Arrow<S>, v: &[S], t: f64, steps: usize) -> Result<Arrow<S>> {
    let n = g.coords.len();
    let state: Vec<S> = g.coords.iter().chain(v).copied().collect();
    let k = match gpd {
        GroupoidDescriptor::Group(grp) => grp.group().n(),
        GroupoidDescriptor::Pair(_) => 0,
        _ => return Err(Error::Precondition("sprays are implemented for pair groupoids and groups".into())),
    };
    let rhs = |_t: f64, s: &[S]| -> Result<Vec<S>> {
        let mut out: Vec<S> = s[n..].to_vec();
        if k == 0 {
            out.extend(std::iter::repeat(S::zero()).take(n));
        } else {
            let c = Mat::from_vec(k, s[..n].to_vec());
            let cd = Mat::from_vec(k, s[n..].to_vec());
            let inv = c.inverse().ok_or_else(|| Error::Domain("spray left the invertible matrices".into()))?;
            out.extend((&(&cd * &inv) * &cd).into_vec());
        }
        Ok(out)
    };
    let path = rk4_solve(rhs, &state, IntegrationParams::new(0.0, t, steps))?;
    let end = path.last().expect("non-empty path");
    let coords = end[..n].to_vec();
    Ok(match gpd {
        GroupoidDescriptor::Pair(p) => {
            let d = p.base().dim();
            p.arrow(&coords[..d], &coords[d..])
        }
        _ => Point::new(g.chart, coords),
    })
}

/// Result of an adaptedness sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedReport {
    pub max_drift: f64,
    pub witness: Vec<f64>,
    pub samples: usize,
}

/// A random vector in `ker Tα` (or `ker Tβ`) at `g`, shrunk until it lies in the domain.
pub fn random_vertical(
    a: &LocalAddition,
    space: &impl Groupoid,
    rng: &mut impl Rng,
    g: &Arrow,
    side: Side,
    scale: f64,
) -> Option<Vec<f64>> {
    let basis = space.vertical_basis(g, side);
    let mut v = vec![0.0; space.coord_dim()];
    for b in &basis {
        let c: f64 = rng.gen_range(-scale..scale);
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += c * bi;
        }
    }
    for _ in 0..30 {
        if a.in_domain(g, &v) {
            return Some(v);
        }
        v.iter_mut().for_each(|x| *x *= 0.5);
    }
    None
}

/// Maximum base drift `d(α(A(v)), α(g))` (or `β` for target-adapted additions) over
/// random vertical vectors.
pub fn check_adapted(a: &LocalAddition, space: &impl Groupoid, n: usize, seed: u64) -> Result<AdaptedReport> {
    let side = a.adapted().ok_or_else(|| Error::Precondition(format!("{} is not declared adapted", a.name())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AdaptedReport { max_drift: 0.0, witness: vec![], samples: n };
    let project = |g: &Arrow| match side {
        Side::Source => space.source(g),
        Side::Target => space.target(g),
    };
    for _ in 0..n {
        let g = space.random_arrow(&mut rng);
        let Some(v) = random_vertical(a, space, &mut rng, &g, side, 1.0) else { continue };
        let moved = a.apply(&g, &v)?;
        let drift = space.base_distance(&project(&moved), &project(&g));
        if drift > rep.max_drift {
            rep.max_drift = drift;
            rep.witness = g.coords.clone();
        }
    }
    if rep.max_drift > ADAPTED_TOL {
        return Err(Error::NotAdapted { drift: rep.max_drift, witness: rep.witness });
    }
    Ok(rep)
}

/// `max d(A(0_g), g)` over random arrows.
pub fn zero_residual(a: &LocalAddition, space: &impl Groupoid, n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let g = space.random_arrow(&mut rng);
        let z = vec![0.0; g.coords.len()];
        worst = worst.max(space.distance(&a.apply(&g, &z)?, &g));
    }
    Ok(worst)
}

/// `max d(A((π×A)⁻¹(g, g')), g')` over random nearby pairs `g' = A(v)`.
pub fn round_trip_residual(a: &LocalAddition, space: &impl Groupoid, n: usize, seed: u64, scale: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let g = space.random_arrow(&mut rng);
        let basis = space.tangent_basis(&g);
        let mut v = vec![0.0; g.coords.len()];
        for b in &basis {
            let c: f64 = rng.gen_range(-scale..scale);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += c * bi;
            }
        }
        if !a.in_domain(&g, &v) {
            continue;
        }
        let target = a.apply(&g, &v)?;
        let w = a.inverse(space, &g, &target)?;
        worst = worst.max(space.distance(&a.apply(&g, &w)?, &target));
    }
    Ok(worst)
}

/// Largest disagreement of the chart formulas `A_ij` and `A_mn` on random vectors
/// at arrows lying in several charts.
pub fn gauge_overlap_residual(gg: &GaugeGroupoid, n: usize, seed: u64, scale: f64, transported: bool) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cover = gg.bundle().cover().clone();
    if cover.len() < 2 {
        return Err(Error::Precondition("chart overlaps need a cover with at least two arcs".into()));
    }
    let mut worst: f64 = 0.0;
    let (mut compared, mut drawn) = (0, 0);
    while compared < n {
        drawn += 1;
        if drawn > 100 * n.max(1) {
            return Err(Error::Precondition("too few random arrows land in chart overlaps".into()));
        }
        let g = gg.random_arrow(&mut rng);
        let v: Vec<f64> = {
            let basis = gg.tangent_basis(&g);
            let mut v = vec![0.0; g.coords.len()];
            for b in &basis {
                let c: f64 = rng.gen_range(-scale..scale);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += c * bi;
                }
            }
            v
        };
        let mut images = Vec::new();
        for &m in &cover.charts_at(g.coords[0]) {
            for &k in &cover.charts_at(g.coords[1]) {
                let chart = Chart::Arcs { target: m, source: k };
                let (gc, vc) = gg.to_chart(&g.seeded(&v), chart)?.split();
                if let Ok(r) = gauge_apply_in_chart(gg, &gc, &vc, transported) {
                    images.push(r);
                }
            }
        }
        if images.len() < 2 {
            continue;
        }
        compared += 1;
        for r in &images[1..] {
            worst = worst.max(gg.distance(&images[0], r));
        }
    }
    Ok(worst)
}
