//! The verification suites. Each returns its checks, metadata and CSV payloads;
//! nothing here touches the file system.

use crate::config::{self, SceneConfig};
use lie_bisections::algebroid::{
    anchor_morphism_residual, atiyah_residual, bracket_samples, group_bracket, phi_and_naturality_check,
    related_residual, right_invariance_residual, AlgebroidSection, SampledSection,
};
use lie_bisections::bisection::Bisection;
use lie_bisections::flow::{evolve, flow, flow_properties_check, flow_trajectory, product_integral_residual, TimeDependentSection};
use lie_bisections::gauge_extension::{
    beta_star, beta_star_section, decompose_diffeo, extension_membership, kernel_closure_residual, random_kernel_element,
    trivial_reduction_residual,
};
use lie_bisections::groupoid::axioms::axiom_report;
use lie_bisections::groupoid::{GroupOverPoint, Groupoid, GroupoidDescriptor, Morphism, TangentGroupoid};
use lie_bisections::io::{write_bisection_grid, write_bracket_table, write_trajectory};
use lie_bisections::local_addition::{
    check_adapted, gauge_overlap_residual, round_trip_residual, spray_geodesic, zero_residual, LocalAddition, SPRAY_STEPS,
};
use lie_bisections::numerics::{IntegrationParams, Mat};
use lie_bisections::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const SUITES: [&str; 8] = [
    "groupoid-axioms",
    "local-addition",
    "bisection",
    "lalg",
    "flow",
    "regularity",
    "gauge-extension",
    "naturality",
];

/// Largest time step of the central differences in the regularity suite.
const FD_MAX: f64 = 1.0 / 800.0;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Everything a suite produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub meta: Map<String, Value>,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Run sizes after command-line overrides.
#[derive(Clone, Copy, Debug)]
pub struct Sizes {
    pub seed: u64,
    pub grid: usize,
    pub steps: usize,
    pub samples: usize,
    pub bracket_step: f64,
}

pub struct Ctx<'a> {
    pub suite: &'static str,
    pub gpd: &'a GroupoidDescriptor,
    pub cfg: &'a SceneConfig,
    pub sizes: Sizes,
}

struct Recorder<'a> {
    suite: &'a str,
    tolerances: &'a BTreeMap<String, f64>,
    out: Outcome,
}

impl Recorder<'_> {
    /// `residual ≤ tol`, where `tol` is the most specific override or `default`.
    fn check(&mut self, name: &str, residual: f64, default: f64) {
        let tol = self
            .tolerances
            .get(&format!("{}.{name}", self.suite))
            .or_else(|| self.tolerances.get(self.suite))
            .copied()
            .unwrap_or(default);
        let residual = residual + 0.0; // -0.0 prints as such in JSON
        self.out.checks.push(Check { name: name.into(), residual, tol, pass: residual <= tol });
    }

    fn meta(&mut self, key: &str, v: impl Into<Value>) {
        self.out.meta.insert(key.into(), v.into());
    }

    fn file(&mut self, name: &str, bytes: Vec<u8>) {
        self.out.files.push((name.into(), bytes));
    }
}

/// `|log₂(e₁/e₂) − p|` for errors at step `h` and `h/2`, `None` when both are at round-off.
fn order_defect(e1: f64, e2: f64, p: f64, floor: f64) -> Option<(f64, f64)> {
    (e2 > floor && e1 > floor).then(|| {
        let slope = (e1 / e2).log2();
        (slope, (slope - p).abs())
    })
}

/// Whether `suite` can run on `gpd`; the error text names the mismatch.
pub fn compatible(suite: &str, gpd: &GroupoidDescriptor) -> std::result::Result<(), String> {
    match suite {
        "gauge-extension" if gpd.as_gauge().is_none() => {
            Err(format!("suite `gauge-extension` needs a gauge groupoid, the scene describes {}", gpd.name()))
        }
        _ => Ok(()),
    }
}

pub fn run(ctx: &Ctx) -> Result<Outcome> {
    let mut rec = Recorder { suite: ctx.suite, tolerances: &ctx.cfg.tolerances, out: Outcome::default() };
    match ctx.suite {
        "groupoid-axioms" => axioms(ctx, &mut rec)?,
        "local-addition" => additions(ctx, &mut rec)?,
        "bisection" => bisections(ctx, &mut rec)?,
        "lalg" => lalg(ctx, &mut rec)?,
        "flow" => flows(ctx, &mut rec)?,
        "regularity" => regularity(ctx, &mut rec)?,
        "gauge-extension" => gauge_extension(ctx, &mut rec)?,
        "naturality" => naturality(ctx, &mut rec)?,
        other => unreachable!("suite `{other}` was validated by the caller"),
    }
    Ok(rec.out)
}

fn rng(ctx: &Ctx) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ctx.sizes.seed)
}

/// Configured sections `X`, `Y`, else `sin ∂`, `cos ∂` on the circle, else random ones.
fn sections(ctx: &Ctx) -> Result<(AlgebroidSection, AlgebroidSection)> {
    let g = ctx.gpd;
    let mut rng = rng(ctx);
    let fallback = |idx: usize, rng: &mut ChaCha8Rng| -> Result<AlgebroidSection> {
        match g {
            GroupoidDescriptor::Pair(p) if p.base().dim() == 1 => AlgebroidSection::pair(g, &[["sin(x)", "cos(x)"][idx]]),
            _ => Ok(AlgebroidSection::random(g, rng, 0.5)),
        }
    };
    let parse = |spec: &Option<Vec<String>>, idx: usize, rng: &mut ChaCha8Rng| match spec {
        Some(e) => config::section(g, e).map_err(|e| lie_bisections::Error::Config(e.0)),
        None => fallback(idx, rng),
    };
    let x = parse(&ctx.cfg.sections.x, 0, &mut rng)?;
    let y = parse(&ctx.cfg.sections.y, 1, &mut rng)?;
    Ok((x, y))
}

fn eta(ctx: &Ctx) -> Result<Arc<TimeDependentSection>> {
    let configured = config::eta(ctx.gpd, &ctx.cfg.flow).map_err(|e| lie_bisections::Error::Config(e.0))?;
    Ok(Arc::new(configured.unwrap_or_else(|| TimeDependentSection::random(ctx.gpd, &mut rng(ctx), 0.5))))
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn axioms(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let rep = axiom_report(g, ctx.sizes.samples, ctx.sizes.seed)?;
    let tol = if matches!(g, GroupoidDescriptor::Group(_)) { 1e-10 } else { 1e-9 };
    for (name, r) in &rep.entries {
        rec.check(name, *r, tol);
    }
    rec.check("smoothness", rep.smoothness, 1e-6);
    let anchor = Morphism::anchor(g.clone());
    rec.check("anchor-homomorphism", anchor.homomorphism_residual(ctx.sizes.samples.min(100), ctx.sizes.seed)?, 1e-9);
    rec.meta("max_residual", rep.max_residual());
    Ok(())
}

fn additions(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let (n, seed) = (ctx.sizes.samples, ctx.sizes.seed);
    let a = LocalAddition::for_groupoid(g);
    rec.meta("addition", a.name());
    rec.check("zero", zero_residual(&a, g, n, seed)?, 1e-14);
    rec.check("adapted-drift", check_adapted(&a, g, n, seed)?.max_drift, 1e-12);
    rec.check("inverse-round-trip", round_trip_residual(&a, g, n, seed, 0.3)?, 1e-8);
    match g {
        GroupoidDescriptor::Pair(_) => {
            let op = LocalAddition::opposite(a.clone(), g.clone())?;
            rec.check("opposite-drift", check_adapted(&op, g, n, seed)?.max_drift, 1e-12);
        }
        GroupoidDescriptor::Gauge(gg) if gg.bundle().cover().len() > 1 => {
            rec.check("chart-overlap", gauge_overlap_residual(gg, n, seed, 0.3, true)?, 1e-9);
        }
        GroupoidDescriptor::Group(gp) => {
            let grp = gp.group();
            let mut rng = rng(ctx);
            let (mut spray, mut scaling) = (0.0f64, 0.0f64);
            for _ in 0..n.min(10) {
                let h = g.random_arrow(&mut rng);
                let v = grp.random_algebra(&mut rng, 0.8);
                let hm = Mat::from_vec(grp.n(), h.coords.clone());
                let vh = &v * &hm;
                let geo = spray_geodesic(g, &h, vh.as_slice(), 1.0, SPRAY_STEPS)?;
                spray = spray.max((&Mat::from_vec(grp.n(), geo.coords) - &(&v.expm() * &hm)).max_abs());
                let lhs = spray_geodesic(g, &h, vh.scale(0.6).as_slice(), 0.7, SPRAY_STEPS)?;
                let rhs = spray_geodesic(g, &h, vh.as_slice(), 0.42, SPRAY_STEPS)?;
                scaling = scaling.max(g.distance(&lhs, &rhs));
            }
            rec.check("spray-exp", spray, 1e-8);
            rec.check("spray-scaling", scaling, 1e-7);
            let t = TangentGroupoid::new(GroupOverPoint::new(grp.clone()));
            let f = LocalAddition::flip(LocalAddition::Group(grp.clone()))?;
            rec.check("flip-zero", zero_residual(&f, &t, n, seed)?, 1e-14);
            rec.check("flip-round-trip", round_trip_residual(&f, &t, n, seed, 0.3)?, 1e-8);
        }
        _ => {}
    }
    Ok(())
}

fn bisections(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let grid = ctx.sizes.grid;
    let mut rng = rng(ctx);
    let count = (ctx.sizes.samples / 20).clamp(3, 20);
    let circle = matches!(g, GroupoidDescriptor::Pair(p) if p.base().dim() == 1);
    let mut bis = Vec::with_capacity(count);
    let mut attempts = 0;
    while bis.len() < count && attempts < 10 * count {
        attempts += 1;
        let b = if circle {
            Bisection::random_fourier(&mut rng, 4, 0.45)
        } else {
            let s = AlgebroidSection::random(g, &mut rng, 0.3);
            Bisection::addition(g.clone(), s, 1.0, LocalAddition::for_groupoid(g))
        }
        .with_grid(grid);
        if b.is_bisection() {
            bis.push(b);
        }
    }
    if bis.is_empty() {
        return Err(lie_bisections::Error::Precondition("no valid bisection among the random draws".into()));
    }
    let one = Bisection::unit(g.clone()).with_grid(grid);
    let (mut assoc, mut inv, mut unit, mut beta, mut act, mut alpha) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut min_d = f64::INFINITY;
    let m = bis.len();
    for k in 0..m {
        let (a, b, c) = (&bis[k], &bis[(k + 1) % m], &bis[(k + 2) % m]);
        let d = a.diagnostics();
        alpha = alpha.max(d.alpha_residual);
        min_d = min_d.min(d.min_derivative);
        let ab = a.star(b)?;
        assoc = assoc.max(ab.star(c)?.sup_distance(&a.star(&b.star(c)?)?)?);
        let ai = a.inverse()?;
        inv = inv.max(a.star(&ai)?.sup_distance(&one)?).max(ai.star(a)?.sup_distance(&one)?);
        unit = unit.max(a.star(&one)?.sup_distance(a)?).max(one.star(a)?.sup_distance(a)?);
        for x in ab.grid_form()?.points.iter() {
            beta = beta.max(g.base_distance(&ab.beta(x)?, &a.beta(&b.beta(x)?)?));
        }
        let h = g.random_arrow(&mut rng);
        act = act.max(g.distance(&ab.act(&h)?, &a.act(&b.act(&h)?)?));
    }
    rec.check("associativity", assoc, 1e-8);
    rec.check("inverse", inv, 1e-8);
    rec.check("unit", unit, 1e-12);
    rec.check("beta-composition", beta, 1e-9);
    rec.check("action-homomorphism", act, 1e-9);
    rec.check("alpha-residual", alpha, 1e-10);
    rec.meta("bisections", m);
    rec.meta("min_derivative", min_d);
    let grid_csv = csv(|w| write_bisection_grid(w, &bis[0]))?;
    rec.file("bisection-grid.csv", grid_csv);
    Ok(())
}

fn lalg(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let (n, h) = (ctx.sizes.grid, ctx.sizes.bracket_step);
    let (x, y) = sections(ctx)?;
    let a = LocalAddition::for_groupoid(g);
    let alg = bracket_samples(g, &x, &y, n)?;
    let cancel = |h: f64| -> Result<f64> {
        let grp = group_bracket(g, &x, &y, &a, h, n)?;
        grp.combine(1.0, &alg).map(|s| s.sup_norm())
    };
    let (e1, e2) = (cancel(h)?, cancel(h / 2.0)?);
    rec.check("cancellation", e1, 5e-4);
    match order_defect(e1, e2, 2.0, 1e-10) {
        Some((slope, defect)) => {
            rec.check("h2-order", defect, 0.25);
            rec.meta("slope", slope);
        }
        None => rec.meta("slope", Value::Null),
    }
    let yx = bracket_samples(g, &y, &x, n)?;
    rec.check("antisymmetry", alg.combine(1.0, &yx)?.sup_norm(), 1e-9);
    rec.check("anchor-morphism", anchor_morphism_residual(g, &x, &y, n)?, 1e-6);
    rec.check("right-invariance", right_invariance_residual(g, &x, ctx.sizes.samples.min(50), ctx.sizes.seed)?, 1e-9);
    rec.meta("bracket_step", h);
    rec.meta("algebroid_sup", alg.sup_norm());
    let xs = SampledSection::sample(g, &x, n)?;
    let ys = SampledSection::sample(g, &y, n)?;
    let table = csv(|w| write_bracket_table(w, &xs, &ys, &alg))?;
    rec.file("bracket-table.csv", table);
    Ok(())
}

fn flows(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let Sizes { seed, grid, steps, samples, .. } = ctx.sizes;
    let eta = eta(ctx)?;
    let rep = flow_properties_check(g, &eta, samples.min(20), seed, steps, grid)?;
    rec.check("cocycle", rep.cocycle, 1e-6);
    rec.check("right-equivariance", rep.equivariance, 1e-8);
    rec.check("alpha-invariance", rep.alpha_invariance, 1e-12);
    rec.check("non-diffeomorphic-slices", if rep.diffeomorphisms { 0.0 } else { 1.0 }, 0.5);
    rec.meta("min_derivative", rep.min_derivative);

    // Successive halving from a coarse step count; RK4 differences shrink by 2⁴.
    let g0 = g.random_arrow(&mut rng(ctx));
    let end = |k: usize| flow(g, &eta, &g0, IntegrationParams::new(0.0, 1.0, k));
    let (f8, f16, f32) = (end(8)?, end(16)?, end(32)?);
    let (e1, e2) = (g.distance(&f8, &f16), g.distance(&f16, &f32));
    match order_defect(e1, e2, 4.0, 1e-12) {
        Some((slope, defect)) => {
            rec.check("rk4-order", defect, 0.5);
            rec.meta("slope", slope);
        }
        None => rec.meta("slope", Value::Null),
    }

    let params = IntegrationParams::new(0.0, 1.0, steps);
    let traj = flow_trajectory(g, &eta, &g0, params)?;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * params.dt()).collect();
    let out = csv(|w| write_trajectory(w, g, &times, &traj))?;
    rec.file("trajectory.csv", out);
    Ok(())
}

fn regularity(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let Sizes { grid, steps, .. } = ctx.sizes;
    let eta = eta(ctx)?;
    let path = evolve(g, eta, IntegrationParams::new(0.0, 1.0, steps), grid)?;
    let (mut alpha, mut min_d, mut invalid) = (0.0f64, f64::INFINITY, 0usize);
    for b in &path.values {
        let d = b.diagnostics();
        alpha = alpha.max(d.alpha_residual);
        min_d = min_d.min(d.min_derivative);
        invalid += usize::from(!d.valid);
    }
    rec.check("slice-alpha-residual", alpha, 1e-12);
    rec.check("invalid-slices", invalid as f64, 0.5);
    let points = grid.min(16);
    // The difference step divides the path step and stays below FD_MAX.
    let dt = 1.0 / steps as f64;
    let fd = dt / (dt / FD_MAX).ceil().max(2.0);
    let r1 = product_integral_residual(&path, fd, points)?;
    let r2 = product_integral_residual(&path, fd / 2.0, points)?;
    rec.check("product-integral", r1, 1e-5);
    match order_defect(r1, r2, 2.0, 1e-11) {
        Some((slope, defect)) => {
            rec.check("fd-order", defect, 0.25);
            rec.meta("slope", slope);
        }
        None => rec.meta("slope", Value::Null),
    }
    rec.meta("fd_step", fd);
    rec.meta("min_derivative", min_d);
    rec.meta("max_jump", path.max_jump()?);
    Ok(())
}

fn gauge_extension(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let gauge = ctx.gpd.as_gauge().expect("compatibility checked before running");
    let Sizes { seed, grid, samples, .. } = ctx.sizes;
    let f = Bisection::circle_map(&ctx.cfg.diffeo.map)?.with_grid(grid);
    let d = decompose_diffeo(&f, gauge.bundle().partition())?;
    rec.check("telescoping", d.telescoping, 1e-9);
    rec.check("support", d.support, 1e-14);
    let s = beta_star_section(&f, gauge)?;
    rec.check("beta-star-section", beta_star(&s)?.sup_distance(&f)?, 1e-8);
    rec.check("kernel-closure", kernel_closure_residual(gauge, samples.min(100), seed, grid)?, 1e-10);
    let k = random_kernel_element(gauge, &mut rng(ctx), 0.3, grid)?;
    let m = extension_membership(&k)?;
    rec.check("kernel-beta-displacement", m.beta_displacement, 1e-10);
    rec.check("kernel-seam", m.seam, 1e-10);
    rec.check("trivial-reduction", trivial_reduction_residual(gauge.bundle().group().clone(), samples, seed)?, 1e-10);
    rec.meta("factors", d.factors.len());
    rec.meta("diffeo", ctx.cfg.diffeo.map.clone());
    Ok(())
}

fn naturality(ctx: &Ctx, rec: &mut Recorder) -> Result<()> {
    let g = ctx.gpd;
    let Sizes { seed, grid, samples, bracket_step, .. } = ctx.sizes;
    let f = match g {
        GroupoidDescriptor::Gauge(_) => Morphism::anchor(g.clone()),
        GroupoidDescriptor::GroupBundle(_) => Morphism::bundle_inclusion(g.clone())?,
        _ => Morphism::identity(g.clone()),
    };
    rec.meta("morphism", format!("{:?}", f.kind()));
    let (x, y) = sections(ctx)?;
    let n = grid.min(32);
    let rep = phi_and_naturality_check(&f, &x, &y, bracket_step, n)?;
    rec.check("algebroid-pushforward", rep.algebroid, 1e-6);
    rec.check("group-pushforward", rep.group, 1e-6);
    rec.check("homomorphism", f.homomorphism_residual(samples.min(100), seed)?, 1e-9);
    if let Some(gg) = g.as_gauge() {
        if gg.bundle().is_trivial() && gg.bundle().cover().len() == 1 {
            rec.check("atiyah", atiyah_residual(g, &x, &y, n)?, 1e-6);
        }
    }
    let a = LocalAddition::for_groupoid(g);
    rec.check("related-curves", related_residual(g, &x, &a, samples.min(100), seed, 1e-4)?, 5e-6);
    Ok(())
}

/// The deterministic part of the run description.
pub fn base_meta(gpd: &GroupoidDescriptor, sizes: &Sizes) -> Map<String, Value> {
    let v = json!({
        "groupoid": gpd.name(),
        "seed": sizes.seed,
        "grid": sizes.grid,
        "steps": sizes.steps,
        "samples": sizes.samples,
    });
    match v {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}
