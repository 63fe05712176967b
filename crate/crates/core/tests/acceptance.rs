//! End-to-end acceptance run: one line per criterion, non-zero exit on failure.

use lie_bisections::algebroid::{
    atiyah_residual, bracket_samples, group_bracket, phi_and_naturality_check, related_residual, AlgebroidSection,
    SampledSection, BRACKET_STEP,
};
use lie_bisections::bisection::Bisection;
use lie_bisections::flow::{evolve, flow, flow_properties_check, product_integral_residual, TimeDependentSection};
use lie_bisections::gauge_extension::{
    beta_star, beta_star_section, decompose_diffeo, kernel_closure_residual, trivial_reduction_residual,
};
use lie_bisections::groupoid::axioms::axiom_report;
use lie_bisections::groupoid::{
    GaugeGroupoid, GroupOverPoint, Groupoid, GroupoidDescriptor, Morphism, PairGroupoid, PrincipalBundle,
    TangentGroupoid,
};
use lie_bisections::local_addition::{
    check_adapted, gauge_overlap_residual, round_trip_residual, spray_geodesic, zero_residual, LocalAddition, SPRAY_STEPS,
};
use lie_bisections::manifolds::MatrixGroup;
use lie_bisections::numerics::{IntegrationParams, Mat};
use lie_bisections::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

enum Bound {
    Below(f64),
    Above(f64),
}

struct Check {
    name: String,
    value: f64,
    bound: Bound,
}

impl Check {
    fn pass(&self) -> bool {
        match self.bound {
            Bound::Below(t) => self.value < t,
            Bound::Above(t) => self.value >= t,
        }
    }
}

fn below(name: impl Into<String>, value: f64, tol: f64) -> Check {
    Check { name: name.into(), value, bound: Bound::Below(tol) }
}

fn above(name: impl Into<String>, value: f64, min: f64) -> Check {
    Check { name: name.into(), value, bound: Bound::Above(min) }
}

fn pair() -> GroupoidDescriptor {
    PairGroupoid::circle().into()
}

fn so3() -> GroupoidDescriptor {
    GroupOverPoint::new(MatrixGroup::SO3).into()
}

fn reference_gauge() -> GaugeGroupoid {
    GaugeGroupoid::new(PrincipalBundle::reference())
}

fn sup_vec(a: &SampledSection, f: impl Fn(&[f64]) -> f64) -> f64 {
    a.vectors.iter().map(|v| f(v)).fold(0.0, f64::max)
}

fn axioms() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cases: [(&str, GroupoidDescriptor, f64); 4] = [
        ("Pair(S1)", pair(), 1e-9),
        ("SO3", so3(), 1e-9),
        ("Heisenberg3", GroupOverPoint::new(MatrixGroup::Heisenberg3).into(), 1e-12),
        ("Gauge(reference)", reference_gauge().into(), 1e-9),
    ];
    for (name, g, tol) in cases {
        out.push(below(name, axiom_report(&g, 1000, 1)?.max_residual(), tol));
    }
    Ok(out)
}

fn bisection_group() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bis: Vec<Bisection> = (0..50).map(|_| Bisection::random_fourier(&mut rng, 4, 0.45)).collect();
    let one = Bisection::unit(PairGroupoid::circle());
    let (mut assoc, mut inv, mut iso, mut min_d) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for k in 0..bis.len() {
        let (a, b, c) = (&bis[k], &bis[(k + 1) % 50], &bis[(k + 2) % 50]);
        min_d = min_d.min(a.diagnostics().min_derivative);
        assoc = assoc.max(a.star(b)?.star(c)?.sup_distance(&a.star(&b.star(c)?)?)?);
        let ai = a.inverse()?;
        inv = inv.max(a.star(&ai)?.sup_distance(&one)?).max(ai.star(a)?.sup_distance(&one)?);
        let ab = a.star(b)?;
        for x in ab.grid_form()?.points.iter() {
            let composed = a.beta(&b.beta(x)?)?;
            iso = iso.max(PairGroupoid::circle().base_distance(&ab.beta(x)?, &composed));
            let back = a.beta(&ai.beta(x)?)?;
            iso = iso.max(PairGroupoid::circle().base_distance(&back, x));
        }
    }
    Ok(vec![
        above("min beta-derivative", min_d, 0.5),
        below("associativity", assoc, 1e-8),
        below("inverse laws", inv, 1e-8),
        below("isomorphism to Diff(S1)", iso, 1e-9),
    ])
}

fn brackets() -> Result<Vec<Check>> {
    let g = pair();
    let n = 32;
    let x = AlgebroidSection::pair(&g, &["sin(x)"])?;
    let y = AlgebroidSection::pair(&g, &["cos(x)"])?;
    let a = LocalAddition::for_groupoid(&g);
    let alg = bracket_samples(&g, &x, &y, n)?;
    let alg_res = sup_vec(&alg, |v| (v[0] + 1.0).abs().max(v[1].abs()));
    let err = |h: f64| -> Result<f64> {
        let gb = group_bracket(&g, &x, &y, &a, h, n)?;
        Ok(sup_vec(&gb, |v| (v[0] - 1.0).abs().max(v[1].abs())))
    };
    let (e1, e2) = (err(BRACKET_STEP)?, err(BRACKET_STEP / 2.0)?);

    let s = so3();
    let grp = MatrixGroup::SO3;
    let v = grp.hat(&[0.3, -0.2, 0.5]);
    let w = grp.hat(&[-0.1, 0.4, 0.2]);
    let comm = v.commutator(&w);
    let (xs, ys) = (AlgebroidSection::constant(&s, &v)?, AlgebroidSection::constant(&s, &w)?);
    let alg_so3 = Mat::from_vec(3, bracket_samples(&s, &xs, &ys, 1)?.vectors[0].clone());
    let grp_so3 = group_bracket(&s, &xs, &ys, &LocalAddition::for_groupoid(&s), BRACKET_STEP, 1)?;
    let grp_so3 = Mat::from_vec(3, grp_so3.vectors[0].clone());
    Ok(vec![
        below("Pair algebroid bracket + 1", alg_res, 1e-7),
        below("Pair group bracket - 1 (h = 1e-3)", e1, 5e-4),
        above("h^2 scaling: error ratio under halving h", e1 / e2, 3.5),
        below("SO3 group bracket - [V,W]", (&grp_so3 - &comm).max_abs(), 5e-4),
        below("SO3 algebroid bracket + [V,W]", (&alg_so3 + &comm).max_abs(), 1e-9),
    ])
}

fn regularity() -> Result<Vec<Check>> {
    let g = so3();
    let v = MatrixGroup::SO3.hat(&[0.4, -0.7, 0.3]);
    let eta = Arc::new(TimeDependentSection::Constant(AlgebroidSection::constant(&g, &v)?));
    let path = evolve(&g, eta, IntegrationParams::new(0.0, 1.0, 200), 1)?;
    let end = path.values.last().expect("non-empty path").eval::<f64>(&[])?;
    let exp_err = (&Mat::from_vec(3, end.coords) - &v.expm()).max_abs();
    let r1 = product_integral_residual(&path, 1.0 / 400.0, 1)?;
    let r2 = product_integral_residual(&path, 1.0 / 800.0, 1)?;
    Ok(vec![
        below("evolve(V)(1) - exp(V)", exp_err, 1e-8),
        below("product integral residual (FD step 1/400)", r1, 1e-5),
        above("O(h^2): residual ratio under FD-step halving", r1 / r2, 3.5),
    ])
}

fn flow_laws() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in [pair(), so3(), reference_gauge().into()] {
        let eta = Arc::new(TimeDependentSection::random(&g, &mut rng, 0.5));
        let rep = flow_properties_check(&g, &eta, 20, 7, 100, 64)?;
        out.push(below(format!("{} cocycle", g.name()), rep.cocycle, 1e-6));
        out.push(below(format!("{} right-equivariance", g.name()), rep.equivariance, 1e-8));
    }
    let s = so3();
    let v = MatrixGroup::SO3.hat(&[1.2, -1.1, 1.3]);
    let eta = TimeDependentSection::Constant(AlgebroidSection::constant(&s, &v)?);
    let exact = v.expm();
    let err = |steps: usize| -> Result<f64> {
        let e = flow(&s, &eta, &s.unit::<f64>(&[]), IntegrationParams::new(0.0, 1.0, steps))?;
        Ok((&Mat::from_vec(3, e.coords) - &exact).max_abs())
    };
    let (e10, e20, e40) = (err(10)?, err(20)?, err(40)?);
    out.push(above("RK4 error ratio 10 -> 20 steps", e10 / e20, 14.0));
    out.push(above("RK4 error ratio 20 -> 40 steps", e20 / e40, 14.0));
    Ok(out)
}

fn slices_are_bisections() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for g in [pair(), reference_gauge().into()] {
        let eta = Arc::new(TimeDependentSection::random(&g, &mut rng, 0.5));
        let path = evolve(&g, eta, IntegrationParams::new(0.0, 1.0, 40), 128)?;
        let (mut alpha, mut min_d, mut valid) = (0.0f64, f64::INFINITY, true);
        for b in &path.values {
            let d = b.diagnostics();
            alpha = alpha.max(d.alpha_residual);
            min_d = min_d.min(d.min_derivative);
            valid &= d.valid;
        }
        out.push(below(format!("{} alpha residual", g.name()), alpha, 1e-12));
        out.push(above(format!("{} min beta-derivative", g.name()), min_d, 1e-8));
        out.push(above(format!("{} all slices valid", g.name()), valid as u8 as f64, 1.0));
    }
    Ok(out)
}

fn additions() -> Result<Vec<Check>> {
    let p = pair();
    let s = so3();
    let gauge = reference_gauge();
    let gd: GroupoidDescriptor = gauge.clone().into();
    let op = LocalAddition::opposite(LocalAddition::for_groupoid(&p), p.clone())?;
    let mut out = vec![
        below("flat drift", check_adapted(&LocalAddition::for_groupoid(&p), &p, 1000, 1)?.max_drift, 1e-12),
        below("A_H drift", check_adapted(&LocalAddition::for_groupoid(&s), &s, 1000, 2)?.max_drift, 1e-12),
        below("A^op drift", check_adapted(&op, &p, 1000, 3)?.max_drift, 1e-12),
        below("A_Gau drift", check_adapted(&LocalAddition::for_groupoid(&gd), &gd, 1000, 4)?.max_drift, 1e-12),
        below("A_Gau chart overlap", gauge_overlap_residual(&gauge, 200, 5, 0.3, true)?, 1e-9),
    ];
    let grp = MatrixGroup::SO3;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut spray_exp, mut scaling) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let g = s.random_arrow(&mut rng);
        let v = grp.random_algebra(&mut rng, 0.8);
        let gm = Mat::from_vec(3, g.coords.clone());
        // A vector at g is V·g for V in the algebra.
        let vg = &v * &gm;
        let geo = spray_geodesic(&s, &g, vg.as_slice(), 1.0, SPRAY_STEPS)?;
        spray_exp = spray_exp.max((&Mat::from_vec(3, geo.coords) - &(&v.expm() * &gm)).max_abs());
        let (c, t) = (0.6, 0.7);
        let lhs = spray_geodesic(&s, &g, vg.scale(c).as_slice(), t, SPRAY_STEPS)?;
        let rhs = spray_geodesic(&s, &g, vg.as_slice(), c * t, SPRAY_STEPS)?;
        scaling = scaling.max(s.distance(&lhs, &rhs));
    }
    out.push(below("spray vs exp", spray_exp, 1e-8));
    out.push(below("spray scaling law", scaling, 1e-7));
    Ok(out)
}

fn flip() -> Result<Vec<Check>> {
    let t = TangentGroupoid::new(GroupOverPoint::new(MatrixGroup::SO3));
    let f = LocalAddition::flip(LocalAddition::Group(MatrixGroup::SO3))?;
    let zero = zero_residual(&f, &t, 1000, 1)?;
    Ok(vec![
        Check { name: "A(0_v) = v".into(), value: zero, bound: Bound::Below(f64::MIN_POSITIVE) },
        below("Newton round trip", round_trip_residual(&f, &t, 1000, 2, 0.3)?, 1e-8),
    ])
}

fn gauge_extension() -> Result<Vec<Check>> {
    let gauge = reference_gauge();
    let f = Bisection::circle_map("x + 0.2*sin(x)")?;
    let d = decompose_diffeo(&f, gauge.bundle().partition())?;
    let g = Bisection::circle_map("x + 0.2*sin(x) + 0.1")?;
    let s = beta_star_section(&g, &gauge)?;
    let round_trip = beta_star(&s)?.sup_distance(&g)?;
    Ok(vec![
        below("telescoping", d.telescoping, 1e-9),
        Check { name: "support containment".into(), value: d.support, bound: Bound::Below(1e-14) },
        below("beta_* section round trip", round_trip, 1e-8),
        below("kernel closure (100 pairs)", kernel_closure_residual(&gauge, 100, 3, 64)?, 1e-10),
        below("trivial cocycle product structure", trivial_reduction_residual(MatrixGroup::SO3, 1000, 4)?, 1e-10),
    ])
}

fn naturality() -> Result<Vec<Check>> {
    let trivial: GroupoidDescriptor = GaugeGroupoid::new(PrincipalBundle::trivial(MatrixGroup::SO3)).into();
    let x = AlgebroidSection::gauge_uniform(&trivial, "sin(x)", &["cos(x)", "0.3", "sin(2*x)"])?;
    let y = AlgebroidSection::gauge_uniform(&trivial, "0.5*cos(x)", &["0.2", "sin(x)", "-cos(x)"])?;
    let rep = phi_and_naturality_check(&Morphism::anchor(trivial.clone()), &x, &y, BRACKET_STEP, 32)?;
    Ok(vec![
        below("algebroid bracket pushforward", rep.algebroid, 1e-6),
        below("group bracket pushforward", rep.group, 1e-6),
        below("Atiyah algebroid", atiyah_residual(&trivial, &x, &y, 32)?, 1e-6),
    ])
}

fn related() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in [pair(), so3(), reference_gauge().into()] {
        let s = AlgebroidSection::random(&g, &mut rng, 0.5);
        let a = LocalAddition::for_groupoid(&g);
        out.push(below(g.name(), related_residual(&g, &s, &a, 100, 12, 1e-4)?, 5e-6));
    }
    Ok(out)
}

fn main() {
    let criteria: [(&str, fn() -> Result<Vec<Check>>); 11] = [
        ("groupoid axioms", axioms),
        ("bisection group", bisection_group),
        ("bracket signs", brackets),
        ("regularity witness", regularity),
        ("flow laws", flow_laws),
        ("flow slices are bisections", slices_are_bisections),
        ("adapted local additions", additions),
        ("flip addition", flip),
        ("gauge extension", gauge_extension),
        ("naturality", naturality),
        ("action along curves", related),
    ];
    let verbose = std::env::args().any(|a| a == "--verbose" || a == "--nocapture");
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(checks) => {
                let bad: Vec<&Check> = checks.iter().filter(|c| !c.pass()).collect();
                if verbose {
                    for c in &checks {
                        let b = match c.bound {
                            Bound::Below(t) => format!("< {t:e}"),
                            Bound::Above(t) => format!(">= {t}"),
                        };
                        println!("    {}: {:e} ({b})", c.name, c.value);
                    }
                }
                let detail = bad.iter().map(|c| format!("{} = {:e}", c.name, c.value)).collect::<Vec<_>>().join("; ");
                (bad.is_empty(), detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        let status = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({:.1} s){}", k + 1, t.elapsed().as_secs_f64(), if ok { String::new() } else { format!(": {detail}") });
        if !ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of 11 passed in {:.1} s", 11 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
