//! Time-dependent right-invariant vector fields, their flows, and the evolution
//! map `η ↦ (t ↦ Fl(0, t, ·, η)∘1)` into `Bis(G)`.

use crate::algebroid::AlgebroidSection;
use crate::bisection::{Bisection, GridForm};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::groupoid::{right_translate, Arrow, Chart, Groupoid, GroupoidDescriptor};
use crate::numerics::dual::seed;
use crate::numerics::root::wrap_pi;
use crate::numerics::ode::{rk4_step, IntegrationParams};
use crate::numerics::{Dual, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Gauge arrows change chart once the target leaves this fraction of its arc.
pub const SWITCH_FRACTION: f64 = 2.0 / 3.0;

/// `η(t, x)`: a section of `L(G)` for each time.
#[derive(Clone, Debug)]
pub enum TimeDependentSection {
    Constant(AlgebroidSection),
    /// `Σ c_k(t)·X_k` with coefficients written in `t`.
    Combination(Vec<(Expr, AlgebroidSection)>),
    /// Piecewise linear in time between the given sections.
    Sampled { times: Vec<f64>, sections: Vec<AlgebroidSection> },
}

impl TimeDependentSection {
    pub fn zero() -> Self {
        TimeDependentSection::Constant(AlgebroidSection::Zero)
    }

    pub fn combination(terms: &[(&str, AlgebroidSection)]) -> Result<Self> {
        let terms = terms.iter().map(|(c, s)| Ok((Expr::parse(c, &["t"])?, s.clone()))).collect::<Result<Vec<_>>>()?;
        Ok(TimeDependentSection::Combination(terms))
    }

    pub fn sampled(times: Vec<f64>, sections: Vec<AlgebroidSection>) -> Result<Self> {
        if times.len() != sections.len() || times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("sample times must be increasing, one per section".into()));
        }
        Ok(TimeDependentSection::Sampled { times, sections })
    }

    /// `X₀ + t·X₁ + sin(3t)·X₂` with random smooth `X_k` of size `scale`.
    pub fn random(gpd: &GroupoidDescriptor, rng: &mut (impl Rng + ?Sized), scale: f64) -> Self {
        let terms: Vec<(&str, AlgebroidSection)> =
            ["1", "t", "sin(3*t)"].into_iter().map(|c| (c, AlgebroidSection::random(gpd, rng, scale))).collect();
        Self::combination(&terms).expect("fixed coefficient expressions parse")
    }

    /// `η(t, x)` at the unit `1_x` in `chart`.
    pub fn eval_in<S: Scalar>(&self, gpd: &GroupoidDescriptor, t: f64, x: &[S], chart: Chart) -> Result<Vec<S>> {
        match self {
            TimeDependentSection::Constant(s) => s.eval_in(gpd, x, chart),
            TimeDependentSection::Combination(terms) => {
                let mut out = vec![S::zero(); gpd.coord_dim()];
                for (c, s) in terms {
                    let c: f64 = c.eval(&[t]);
                    if c == 0.0 {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(s.eval_in(gpd, x, chart)?) {
                        *o += v.scale(c);
                    }
                }
                Ok(out)
            }
            TimeDependentSection::Sampled { times, sections } => {
                let last = times.len() - 1;
                if t < times[0] - 1e-12 || t > times[last] + 1e-12 {
                    return Err(Error::Precondition(format!("t = {t} outside the sampled interval")));
                }
                let k = times.partition_point(|&s| s <= t).saturating_sub(1).min(last.saturating_sub(1));
                if last == 0 {
                    return sections[0].eval_in(gpd, x, chart);
                }
                let w = ((t - times[k]) / (times[k + 1] - times[k])).clamp(0.0, 1.0);
                let a = sections[k].eval_in(gpd, x, chart)?;
                let b = sections[k + 1].eval_in(gpd, x, chart)?;
                Ok(a.iter().zip(&b).map(|(&p, &q)| p.scale(1.0 - w) + q.scale(w)).collect())
            }
        }
    }
}

/// `f(t, g, η) = T R_g(η(t, β(g)))`.
pub fn ri_field<S: Scalar>(gpd: &GroupoidDescriptor, eta: &TimeDependentSection, t: f64, g: &Arrow<S>) -> Result<Vec<S>> {
    let y = gpd.target(g);
    let chart = gpd.target_unit_chart(&g.chart);
    let u = gpd.unit_in(&y, chart)?;
    let v = eta.eval_in(gpd, t, &y, chart)?;
    right_translate(gpd, &u, &v, g)
}

/// Move a gauge arrow to a deeper target arc once its target leaves the middle of the current one.
fn switch_chart<S: Scalar>(gpd: &GroupoidDescriptor, g: Arrow<S>) -> Result<Arrow<S>> {
    let Some(gg) = gpd.as_gauge() else { return Ok(g) };
    let (i, j) = gg.charts(&g.chart);
    let cover = gg.bundle().cover();
    let arc = cover.arcs[i];
    let y = g.coords[0].value();
    if arc.covers_circle() || (y - arc.center).abs() <= SWITCH_FRACTION * arc.half_width {
        return Ok(g);
    }
    let best = cover.best_chart(y);
    if best == i || cover.arcs[best].depth(y) <= arc.depth(y) {
        return Ok(g);
    }
    gpd.to_chart(&g, Chart::Arcs { target: best, source: j })
}

fn settle<S: Scalar>(gpd: &GroupoidDescriptor, chart: Chart, coords: Vec<S>, t: f64) -> Result<Arrow<S>> {
    match gpd {
        GroupoidDescriptor::Pair(p) => {
            let d = p.base().dim();
            Ok(p.arrow(&coords[..d], &coords[d..]))
        }
        GroupoidDescriptor::Gauge(gg) => {
            let (i, _) = gg.charts(&chart);
            let arc = gg.bundle().cover().arcs[i];
            if !arc.covers_circle() && (coords[0].value() - arc.center).abs() >= arc.half_width {
                return Err(Error::FlowEscapedAtlas { t });
            }
            Ok(Arrow::new(chart, coords))
        }
        _ => Ok(Arrow::new(chart, coords)),
    }
}

/// RK4 trajectory of `g' = f(t, g, η)` from `g0`, one arrow per step.
pub fn flow_trajectory<S: Scalar>(
    gpd: &GroupoidDescriptor,
    eta: &TimeDependentSection,
    g0: &Arrow<S>,
    params: IntegrationParams,
) -> Result<Vec<Arrow<S>>> {
    let dt = params.dt();
    if params.steps > 0 && !dt.is_finite() {
        return Err(Error::InvalidStep(dt));
    }
    let mut out = Vec::with_capacity(params.steps + 1);
    out.push(g0.clone());
    let mut g = g0.clone();
    for step in 0..params.steps {
        let t = params.t0 + step as f64 * dt;
        g = switch_chart(gpd, g)?;
        let chart = g.chart;
        let mut rhs = |s: f64, c: &[S]| ri_field(gpd, eta, s, &Arrow::new(chart, c.to_vec()));
        let next = rk4_step(&mut rhs, t, &g.coords, dt)?;
        if next.iter().any(|c| !c.value().is_finite()) {
            return Err(Error::IntegrationDiverged { step });
        }
        g = settle(gpd, chart, next, t + dt)?;
        out.push(g.clone());
    }
    Ok(out)
}

/// `Fl(t0, t1, g0, η)`.
pub fn flow<S: Scalar>(gpd: &GroupoidDescriptor, eta: &TimeDependentSection, g0: &Arrow<S>, params: IntegrationParams) -> Result<Arrow<S>> {
    Ok(flow_trajectory(gpd, eta, g0, params)?.pop().expect("trajectory starts with g0"))
}

/// Parameters of the bisection `x ↦ Fl(t0, t1, 1_x, η)`.
#[derive(Clone, Debug)]
pub struct FlowSlice {
    pub eta: Arc<TimeDependentSection>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

pub(crate) fn flow_from_unit<S: Scalar>(gpd: &GroupoidDescriptor, slice: &FlowSlice, x: &[S]) -> Result<Arrow<S>> {
    flow(gpd, &slice.eta, &gpd.unit(x), IntegrationParams::new(slice.t0, slice.t1, slice.steps))
}

/// The bisection `x ↦ Fl(t0, t1, 1_x, η)`.
pub fn flow_bisection(gpd: &GroupoidDescriptor, eta: Arc<TimeDependentSection>, params: IntegrationParams) -> Bisection {
    Bisection::flow(gpd.clone(), FlowSlice { eta, t0: params.t0, t1: params.t1, steps: params.steps })
}

/// `t ↦ c_η(t)` on the integration time grid.
#[derive(Clone, Debug)]
pub struct BisectionPath {
    pub gpd: GroupoidDescriptor,
    pub eta: Arc<TimeDependentSection>,
    pub params: IntegrationParams,
    pub times: Vec<f64>,
    pub values: Vec<Bisection>,
}

impl BisectionPath {
    /// Largest sup-distance between consecutive slices.
    pub fn max_jump(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.values.windows(2) {
            worst = worst.max(w[0].sup_distance(&w[1])?);
        }
        Ok(worst)
    }
}

/// Integrate every grid point once (on duals, for the β-Jacobians) and cut the
/// trajectories into time slices. Fails with the first slice that is not a bisection.
pub fn evolve(gpd: &GroupoidDescriptor, eta: Arc<TimeDependentSection>, params: IntegrationParams, grid_n: usize) -> Result<BisectionPath> {
    if params.steps == 0 {
        return Err(Error::InvalidStep(params.dt()));
    }
    let base = gpd.base();
    let d = base.dim();
    let probe = Bisection::unit(gpd.clone()).with_grid(grid_n);
    let n = probe.grid_size();
    let points = base.grid(n);
    let slices = params.steps + 1;
    let mut forms: Vec<GridForm> =
        (0..slices).map(|_| GridForm { points: vec![], arrows: vec![], beta: vec![], jacobian: vec![] }).collect();
    for x in &points {
        if d == 0 {
            let traj = flow_trajectory::<f64>(gpd, &eta, &gpd.unit(x), params)?;
            for (f, a) in forms.iter_mut().zip(traj) {
                f.points.push(x.clone());
                f.arrows.push(a);
                f.beta.push(vec![]);
                f.jacobian.push(vec![]);
            }
            continue;
        }
        let mut jac = vec![vec![vec![0.0; d]; d]; slices];
        for k in 0..d {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            let traj: Vec<Arrow<Dual>> = flow_trajectory(gpd, &eta, &gpd.unit(&seed(x, &e)), params)?;
            for (s, a) in traj.iter().enumerate() {
                let b = gpd.target(a);
                for (i, bi) in b.iter().enumerate() {
                    jac[s][i][k] = bi.deriv;
                }
                if k == 0 {
                    forms[s].arrows.push(a.values());
                    forms[s].beta.push(b.iter().map(|c| c.value).collect());
                }
            }
        }
        for (f, j) in forms.iter_mut().zip(jac) {
            f.points.push(x.clone());
            f.jacobian.push(j);
        }
    }
    let times = params.times();
    let mut values = Vec::with_capacity(slices);
    for (s, form) in forms.into_iter().enumerate() {
        let slice = FlowSlice { eta: eta.clone(), t0: params.t0, t1: times[s], steps: s };
        let b = Bisection::flow(gpd.clone(), slice).with_grid(n).with_grid_form(form);
        if !b.diagnostics().valid {
            return Err(Error::EtaTooLarge { t: times[s] });
        }
        values.push(b);
    }
    Ok(BisectionPath { gpd: gpd.clone(), eta, params, times, values })
}

/// `q − c` in the chart of `c`, with base angles wrapped.
fn coordinate_delta(gpd: &GroupoidDescriptor, c: &Arrow, q: &Arrow) -> Result<Vec<f64>> {
    let q = gpd.to_chart(q, c.chart)?;
    let (d, a) = (gpd.base().dim(), gpd.base().angular_dim());
    let angular = |k: usize| match gpd {
        GroupoidDescriptor::Pair(_) => k % d < a,
        GroupoidDescriptor::Gauge(_) => k < 2,
        GroupoidDescriptor::GroupBundle(_) => k < 1,
        GroupoidDescriptor::Group(_) => false,
    };
    Ok(c.coords
        .iter()
        .zip(&q.coords)
        .enumerate()
        .map(|(k, (p, q))| if angular(k) { wrap_pi(q - p) } else { q - p })
        .collect())
}

/// Pointwise defect of the regularity ODE along `path`: the central difference in
/// time of the chart coordinates (step `fd_step`, from a trajectory integrated with
/// that step) against `T R_{c(t)(x)} η(t, β(c(t)(x)))`, over `n` points per base axis.
pub fn product_integral_residual(path: &BisectionPath, fd_step: f64, n: usize) -> Result<f64> {
    let gpd = &path.gpd;
    let p = path.params;
    let fine = ((p.t1 - p.t0) / fd_step).round() as usize;
    if fine == 0 || fine % p.steps != 0 || ((p.t1 - p.t0) / fine as f64 - fd_step).abs() > 1e-12 {
        return Err(Error::Precondition("the difference step must divide the path step".into()));
    }
    let ratio = fine / p.steps;
    let mut worst: f64 = 0.0;
    for x in gpd.base().grid(n) {
        let unit = gpd.unit(&x);
        let centers = flow_trajectory::<f64>(gpd, &path.eta, &unit, p)?;
        let dense = flow_trajectory::<f64>(gpd, &path.eta, &unit, IntegrationParams::new(p.t0, p.t1, fine))?;
        for k in 1..p.steps {
            let c = &centers[k];
            let j = k * ratio;
            let plus = coordinate_delta(gpd, c, &dense[j + 1])?;
            let minus = coordinate_delta(gpd, c, &dense[j - 1])?;
            let exact = ri_field(gpd, &path.eta, path.times[k], c)?;
            for i in 0..plus.len() {
                worst = worst.max(((plus[i] - minus[i]) / (2.0 * fd_step) - exact[i]).abs());
            }
        }
    }
    Ok(worst)
}

/// Residuals of the flow laws on random data.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowReport {
    /// `Fl(t1,t2)∘Fl(t0,t1) = Fl(t0,t2)`.
    pub cocycle: f64,
    /// `Fl(h)·g = Fl(h·g)`.
    pub equivariance: f64,
    /// `α(Fl(g)) = α(g)`.
    pub alpha_invariance: f64,
    /// Smallest β-map derivative of `Fl(s, t, ·)∘1` over the sampled `(s, t)`.
    pub min_derivative: f64,
    pub diffeomorphisms: bool,
}

pub fn flow_properties_check(
    gpd: &GroupoidDescriptor,
    eta: &Arc<TimeDependentSection>,
    samples: usize,
    seed: u64,
    steps: usize,
    grid_n: usize,
) -> Result<FlowReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t0, t1, t2) = (0.0, 0.5, 1.0);
    let mut rep = FlowReport { min_derivative: f64::INFINITY, diffeomorphisms: true, ..Default::default() };
    for _ in 0..samples {
        let g = gpd.random_arrow(&mut rng);
        let one = flow(gpd, eta, &g, IntegrationParams::new(t0, t2, steps))?;
        let half = flow(gpd, eta, &g, IntegrationParams::new(t0, t1, steps))?;
        let two = flow(gpd, eta, &half, IntegrationParams::new(t1, t2, steps))?;
        rep.cocycle = rep.cocycle.max(gpd.distance(&one, &two));
        rep.alpha_invariance = rep.alpha_invariance.max(gpd.base_distance(&gpd.source(&one), &gpd.source(&g)));

        let k = gpd.random_arrow_with_target(&mut rng, &gpd.source(&g));
        let lhs = gpd.compose(&one, &k)?;
        let rhs = flow(gpd, eta, &gpd.compose(&g, &k)?, IntegrationParams::new(t0, t2, steps))?;
        rep.equivariance = rep.equivariance.max(gpd.distance(&lhs, &rhs));
    }
    for (s, t) in [(t0, t1), (t1, t2), (t0, t2)] {
        let b = flow_bisection(gpd, eta.clone(), IntegrationParams::new(s, t, steps)).with_grid(grid_n);
        let d = b.diagnostics();
        rep.min_derivative = rep.min_derivative.min(d.min_derivative);
        rep.diffeomorphisms &= d.valid;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{GaugeGroupoid, GroupOverPoint, PairGroupoid, PrincipalBundle};
    use crate::manifolds::MatrixGroup;
    use crate::numerics::Mat;

    fn so3() -> GroupoidDescriptor {
        GroupOverPoint::new(MatrixGroup::SO3).into()
    }

    #[test]
    fn so3_constant_field_is_exponential() {
        let g = so3();
        let v = MatrixGroup::SO3.hat(&[0.4, -0.7, 0.3]);
        let eta = TimeDependentSection::Constant(AlgebroidSection::constant(&g, &v).unwrap());
        let e = flow(&g, &eta, &g.unit::<f64>(&[]), IntegrationParams::new(0.0, 1.0, 400)).unwrap();
        let got = Mat::from_vec(3, e.coords);
        let err = (&got - &v.expm()).max_abs();
        assert!(err < 1e-12, "{err:e}");
    }

    #[test]
    fn pair_flow_follows_vector_field() {
        let g: GroupoidDescriptor = PairGroupoid::circle().into();
        let eta = TimeDependentSection::Constant(AlgebroidSection::pair(&g, &["0.5"]).unwrap());
        let p = PairGroupoid::circle().arrow(&[1.0], &[4.0]);
        let r = flow(&g, &eta, &p, IntegrationParams::new(0.0, 1.0, 50)).unwrap();
        assert!((r.coords[0] - 1.5).abs() < 1e-14 && r.coords[1] == 4.0);
    }

    #[test]
    fn gauge_flow_switches_charts() {
        let g: GroupoidDescriptor = GaugeGroupoid::new(PrincipalBundle::reference()).into();
        let eta = TimeDependentSection::Constant(AlgebroidSection::gauge_uniform(&g, "2", &["0.3", "0", "0.1"]).unwrap());
        let u = g.unit(&[0.0]);
        let traj = flow_trajectory::<f64>(&g, &eta, &u, IntegrationParams::new(0.0, 3.0, 300)).unwrap();
        let end = traj.last().unwrap();
        assert!(crate::numerics::root::wrap_pi(end.coords[0] - 6.0).abs() < 1e-10);
        assert!(traj.iter().any(|a| a.chart != u.chart));
    }

    #[test]
    fn evolve_slices_are_bisections() {
        let g: GroupoidDescriptor = PairGroupoid::circle().into();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eta = Arc::new(TimeDependentSection::random(&g, &mut rng, 0.3));
        let path = evolve(&g, eta.clone(), IntegrationParams::new(0.0, 1.0, 20), 32).unwrap();
        assert_eq!(path.values.len(), 21);
        let direct = flow_bisection(&g, eta, IntegrationParams::new(0.0, 1.0, 20)).with_grid(32);
        assert!(path.values[20].sup_distance(&direct).unwrap() < 1e-15);
    }

    #[test]
    fn evolve_rejects_large_fields() {
        let g: GroupoidDescriptor = PairGroupoid::circle().into();
        let eta = Arc::new(TimeDependentSection::Constant(AlgebroidSection::pair(&g, &["20*sin(x)"]).unwrap()));
        assert!(matches!(evolve(&g, eta, IntegrationParams::new(0.0, 1.0, 40), 64), Err(Error::EtaTooLarge { .. })));
    }
}
