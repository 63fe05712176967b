//! The extension `Gau(P) ↪ Bis(Gau(P)) ↠ im(β_*)` for bundles over the circle:
//! splitting a near-identity diffeomorphism into factors supported in single
//! arcs, lifting the factors to bisections, and recognising gauge transformations.
//!
//! The chart `φ_id` of the diffeomorphism group is the flat one,
//! `φ_id(f)(x) = f(x) − x` (wrapped), so `φ_id⁻¹(u) = x + u(x)`.

use crate::algebroid::AlgebroidSection;
use crate::bisection::{BaseMap, Bisection, LIFT_IDENTITY_TOL};
use crate::error::{Error, Result};
use crate::groupoid::{Chart, GaugeGroupoid, Groupoid, GroupoidDescriptor, Morphism, PairGroupoid, PrincipalBundle};
use crate::local_addition::{LocalAddition, TORUS_RADIUS};
use crate::manifolds::{BaseManifold, MatrixGroup, PartitionOfUnity};
use crate::numerics::root::wrap_pi;
use crate::numerics::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The factors `s_1, …, s_n` of a diffeomorphism, with quality measures.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub factors: Vec<Bisection>,
    /// `sup |s_1∘…∘s_n − f|` on the grid.
    pub telescoping: f64,
    /// `sup |s_i(x) − x|` over grid points outside `supp λ_i`, maximised over `i`.
    pub support: f64,
}

fn as_circle_map(f: &Bisection) -> Result<()> {
    if f.groupoid().as_pair().map(|p| p.base()) != Some(BaseManifold::CIRCLE) {
        return Err(Error::Precondition("expected a circle diffeomorphism (bisection of Pair(S¹))".into()));
    }
    Ok(())
}

/// `s_i(f) = φ_id⁻¹(Λ_{i−1}·φ_id(f))⁻¹ ∘ φ_id⁻¹(Λ_i·φ_id(f))`.
pub fn decompose_diffeo(f: &Bisection, pou: &PartitionOfUnity) -> Result<Decomposition> {
    as_circle_map(f)?;
    let form = f.grid_form()?;
    let disp = form.points.iter().zip(&form.beta).map(|(x, b)| wrap_pi(b[0] - x[0]).abs()).fold(0.0, f64::max);
    if disp >= TORUS_RADIUS {
        return Err(Error::OutOfChart(format!("displacement {disp:.4} exceeds the chart radius")));
    }
    let n = f.grid_size();
    let scaled = |k: usize| -> Result<Bisection> {
        Bisection::from_map(BaseManifold::CIRCLE, BaseMap::Weighted { pou: pou.clone(), upto: k, inner: f.clone() })
            .map(|b| b.with_grid(n))
            .map_err(|e| Error::Decomposition(format!("Λ_{k}·φ(f) is not a diffeomorphism: {e}")))
    };
    let mut partial = vec![Bisection::unit(PairGroupoid::circle()).with_grid(n)];
    for k in 1..=pou.len() {
        partial.push(scaled(k)?);
    }
    let mut factors = Vec::with_capacity(pou.len());
    for i in 1..=pou.len() {
        let s = if i == 1 { partial[1].clone() } else { partial[i - 1].inverse()?.star(&partial[i])? };
        if !s.is_bisection() {
            return Err(Error::Decomposition(format!("factor {i} is not a diffeomorphism")));
        }
        factors.push(s);
    }
    let mut total = factors[0].clone();
    for s in &factors[1..] {
        total = total.star(s)?;
    }
    let telescoping = total.sup_distance(f)?;
    let mut support: f64 = 0.0;
    for (i, s) in factors.iter().enumerate() {
        let sf = s.grid_form()?;
        for (x, b) in sf.points.iter().zip(&sf.beta) {
            if !pou.in_support(i, x[0]) {
                support = support.max(wrap_pi(b[0] - x[0]).abs());
            }
        }
    }
    Ok(Decomposition { factors, telescoping, support })
}

/// The gauge bisection `x ↦ ⟨σ_i(s(x)), σ_i(x)⟩` (unit where `s` is the identity).
pub fn lift_factor(i: usize, s: &Bisection, gauge: &GaugeGroupoid) -> Result<Bisection> {
    as_circle_map(s)?;
    let b = gauge.bundle();
    if i >= b.cover().len() {
        return Err(Error::Precondition(format!("no arc {i}")));
    }
    let arc = b.cover().arcs[i];
    let form = s.grid_form()?;
    for (x, y) in form.points.iter().zip(&form.beta) {
        let moved = wrap_pi(y[0] - x[0]).abs() > LIFT_IDENTITY_TOL;
        if moved && !(arc.contains(x[0]) && arc.contains(y[0])) {
            return Err(Error::Support(format!("factor is not localised in arc {i} (moves x = {:.6})", x[0])));
        }
    }
    let lift = Bisection::lift(gauge.clone().into(), i, s.clone()).with_grid(s.grid_size());
    let d = lift.diagnostics();
    if !d.valid {
        return Err(Error::Support(d.reason.unwrap_or_default()));
    }
    Ok(lift)
}

/// `β_*(σ) = β∘σ` as a circle diffeomorphism.
pub fn beta_star(sigma: &Bisection) -> Result<Bisection> {
    sigma.pushforward(&Morphism::anchor(sigma.groupoid().clone()))
}

/// `f ↦ s̃_1(f) ⋆ … ⋆ s̃_n(f)`, a right inverse of `β_*` near the identity.
pub fn beta_star_section(f: &Bisection, gauge: &GaugeGroupoid) -> Result<Bisection> {
    let dec = decompose_diffeo(f, gauge.bundle().partition())?;
    let mut out: Option<Bisection> = None;
    for (i, s) in dec.factors.iter().enumerate() {
        let l = lift_factor(i, s, gauge)?;
        out = Some(match out {
            None => l,
            Some(acc) => acc.star(&l)?,
        });
    }
    out.ok_or_else(|| Error::Decomposition("empty partition of unity".into()))
}

/// `H`-valued data of a gauge transformation in one chart.
#[derive(Clone, Debug)]
pub struct ChartFunction {
    pub chart: usize,
    pub points: Vec<f64>,
    pub values: Vec<Mat>,
}

/// Classification of a gauge bisection in the extension.
#[derive(Clone, Debug)]
pub struct Membership {
    /// `β∘σ = id` within 1e-10.
    pub kernel: bool,
    /// `sup d(β(σ(x)), x)`.
    pub beta_displacement: f64,
    /// Chart functions `g_i`, present for kernel elements.
    pub chart_functions: Vec<ChartFunction>,
    /// `sup |g_m − k_mi g_i k_mi⁻¹|` on overlaps.
    pub seam: f64,
}

pub const KERNEL_TOL: f64 = 1e-10;

pub fn extension_membership(sigma: &Bisection) -> Result<Membership> {
    let gpd = sigma.groupoid();
    let gg = gpd.as_gauge().ok_or_else(|| Error::Precondition("membership is defined for gauge bisections".into()))?;
    let b = gg.bundle();
    let form = sigma.grid_form()?;
    let beta_displacement =
        form.points.iter().zip(&form.beta).map(|(x, y)| gpd.base_distance(x, y)).fold(0.0, f64::max);
    let kernel = beta_displacement < KERNEL_TOL;
    let mut chart_functions = Vec::new();
    if kernel {
        for i in 0..b.cover().len() {
            let mut cf = ChartFunction { chart: i, points: vec![], values: vec![] };
            for (x, a) in form.points.iter().zip(&form.arrows) {
                if !b.cover().arcs[i].contains(x[0]) {
                    continue;
                }
                let local = gpd.to_chart(a, Chart::Arcs { target: i, source: i })?;
                cf.points.push(x[0]);
                cf.values.push(gg.h_part(&local));
            }
            chart_functions.push(cf);
        }
    }
    let mut seam: f64 = 0.0;
    for gi in &chart_functions {
        for gm in &chart_functions {
            if gi.chart == gm.chart {
                continue;
            }
            for (x, hi) in gi.points.iter().zip(&gi.values) {
                let Some(k) = gm.points.iter().position(|p| p == x) else { continue };
                let kmi = b.transition(gm.chart, gi.chart, *x)?;
                let conj = &(&kmi * hi) * &b.group().inverse(&kmi);
                seam = seam.max((&conj - &gm.values[k]).max_abs());
            }
        }
    }
    Ok(Membership { kernel, beta_displacement, chart_functions, seam })
}

/// A random gauge transformation `x ↦ A_Gau(X(x))` with `X` of zero anchor.
pub fn random_kernel_element(gauge: &GaugeGroupoid, rng: &mut (impl rand::Rng + ?Sized), scale: f64, grid_n: usize) -> Result<Bisection> {
    let gpd: GroupoidDescriptor = gauge.clone().into();
    let dim = gauge.bundle().group().algebra_dim();
    let n = gauge.bundle().cover().len();
    let mut coef = |_: usize| {
        let (a, b, c): (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        format!("{} + {}*sin(x) + {}*cos(2*x)", a * scale, b * scale, c * scale)
    };
    let pieces: Vec<Vec<String>> = (0..n).map(|_| (0..dim).map(&mut coef).collect()).collect();
    let refs: Vec<Vec<&str>> = pieces.iter().map(|p| p.iter().map(|s| s.as_str()).collect()).collect();
    let sec = AlgebroidSection::gauge(&gpd, "0", &refs)?;
    let b = Bisection::addition(gpd.clone(), sec, 1.0, LocalAddition::for_groupoid(&gpd)).with_grid(grid_n);
    if !b.is_bisection() {
        return Err(Error::NotABisection("random gauge transformation".into()));
    }
    Ok(b)
}

/// Largest `β`-displacement of `σ ⋆ τ` over random pairs of gauge transformations.
pub fn kernel_closure_residual(gauge: &GaugeGroupoid, pairs: usize, seed: u64, grid_n: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let s = random_kernel_element(gauge, &mut rng, 0.5, grid_n)?;
        let t = random_kernel_element(gauge, &mut rng, 0.5, grid_n)?;
        let m = extension_membership(&s.star(&t)?)?;
        worst = worst.max(m.beta_displacement);
        let m = extension_membership(&s.inverse()?)?;
        worst = worst.max(m.beta_displacement);
    }
    Ok(worst)
}

/// With a trivial cocycle the gauge groupoid is `(S¹ × S¹) × H` with the product
/// multiplication `(y, x, h)(x, w, k) = (y, w, hk)` and `A_Gau = A_M × A_M × A_H`.
pub fn trivial_reduction_residual(group: MatrixGroup, samples: usize, seed: u64) -> Result<f64> {
    let gg = GaugeGroupoid::new(PrincipalBundle::trivial(group.clone()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = LocalAddition::Flat { angular: 2 };
    let a_h = LocalAddition::Group(group.clone());
    let a_gau = LocalAddition::Gauge(gg.clone());
    let pair = PairGroupoid::circle();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = gg.random_arrow(&mut rng);
        let h = gg.random_arrow_with_target(&mut rng, &gg.source(&g));
        let gh = gg.compose(&g, &h)?;
        let base = pair.compose(&pair.arrow(&g.coords[..1], &g.coords[1..2]), &pair.arrow(&h.coords[..1], &h.coords[1..2]))?;
        let hh = &gg.h_part(&g) * &gg.h_part(&h);
        worst = worst.max(pair.distance(&base, &pair.arrow(&gh.coords[..1], &gh.coords[1..2])));
        worst = worst.max((&hh - &gg.h_part(&gh)).max_abs());
        let gi = gg.invert(&g);
        worst = worst.max((&group.inverse(&gg.h_part(&g)) - &gg.h_part(&gi)).max_abs());

        let Some(v) = crate::local_addition::random_vertical(&a_gau, &gg, &mut rng, &g, crate::groupoid::Side::Source, 0.4)
        else {
            continue;
        };
        let lhs = a_gau.apply(&g, &v)?;
        let base = flat.apply(&crate::groupoid::Point::global(g.coords[..2].to_vec()), &v[..2])?;
        let hpart = a_h.apply(&crate::groupoid::Point::global(g.coords[2..].to_vec()), &v[2..])?;
        worst = worst.max(wrap_pi(lhs.coords[0] - base.coords[0]).abs()).max(wrap_pi(lhs.coords[1] - base.coords[1]).abs());
        for (a, b) in lhs.coords[2..].iter().zip(&hpart.coords) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
