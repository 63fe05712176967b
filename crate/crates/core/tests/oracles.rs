//! Independent oracles: closed forms and frozen reference values computed outside the crate.

use lie_bisections::algebroid::{bracket_samples, AlgebroidSection};
use lie_bisections::bisection::Bisection;
use lie_bisections::flow::{flow, TimeDependentSection};
use lie_bisections::gauge_extension::decompose_diffeo;
use lie_bisections::groupoid::{Chart, GaugeGroupoid, GroupOverPoint, Groupoid, GroupoidDescriptor, PairGroupoid, PrincipalBundle};
use lie_bisections::manifolds::MatrixGroup;
use lie_bisections::numerics::root::wrap_pi;
use lie_bisections::numerics::{IntegrationParams, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// The reference bundle is trivialisable: `Φ(σ_0(x)u) = exp(rep_0(x) ê_z)·u`,
/// `Φ(σ_1(x)u) = u` glue across both overlaps. Under it an arrow
/// `⟨σ_i(y)h, σ_j(x)⟩` becomes `(y, x, Φ_i(y)·h·Φ_j(x)⁻¹)` in `Pair(S¹) × SO(3)`.
fn trivialise(i: usize, x: f64) -> Mat {
    match i {
        0 => MatrixGroup::SO3.hat(&[0.0, 0.0, wrap_pi(x)]).expm(),
        _ => Mat::identity(3),
    }
}

fn global_h(gg: &GaugeGroupoid, g: &lie_bisections::groupoid::Arrow) -> Mat {
    let (i, j) = gg.charts(&g.chart);
    let h = gg.h_part(g);
    &(&trivialise(i, g.coords[0]) * &h) * &trivialise(j, g.coords[1]).transpose()
}

#[test]
fn gauge_composition_in_a_global_trivialisation() {
    let gg = GaugeGroupoid::new(PrincipalBundle::reference());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 200 {
        let g = gg.random_arrow(&mut rng);
        let h = gg.random_arrow_with_target(&mut rng, &gg.source(&g));
        let gh = gg.compose(&g, &h).unwrap();
        let expect = &global_h(&gg, &g) * &global_h(&gg, &h);
        assert!((&global_h(&gg, &gh) - &expect).max_abs() < 1e-12);
        let inv = gg.invert(&g);
        assert!((&global_h(&gg, &inv) - &global_h(&gg, &g).transpose()).max_abs() < 1e-12);
        // Every chart expression of the same arrow trivialises to the same matrix.
        for &m in &gg.bundle().cover().charts_at(g.coords[0]) {
            for &n in &gg.bundle().cover().charts_at(g.coords[1]) {
                let other = gg.to_chart(&g, Chart::Arcs { target: m, source: n }).unwrap();
                assert!((&global_h(&gg, &other) - &global_h(&gg, &g)).max_abs() < 1e-12);
            }
        }
        checked += 1;
    }
}

#[test]
fn so3_exponential_reference_values() {
    // scipy.linalg.expm of hat(0.4, -0.7, 0.3).
    let frozen = [
        0.7274479925655106,
        -0.39592195694413385,
        -0.560415222956993,
        0.1327682945935923,
        0.8825206864506512,
        -0.45114279107327054,
        0.673195363964368,
        0.2537775443103644,
        0.6945537847716929,
    ];
    let v = MatrixGroup::SO3.hat(&[0.4, -0.7, 0.3]);
    for (a, b) in MatrixGroup::SO3.exp(&v).as_slice().iter().zip(frozen) {
        assert!((a - b).abs() < 1e-14);
    }
    let g: GroupoidDescriptor = GroupOverPoint::new(MatrixGroup::SO3).into();
    let eta = TimeDependentSection::Constant(AlgebroidSection::constant(&g, &v).unwrap());
    let e = flow(&g, &eta, &g.unit::<f64>(&[]), IntegrationParams::new(0.0, 1.0, 200)).unwrap();
    for (a, b) in e.coords.iter().zip(frozen) {
        assert!((a - b).abs() < 1e-11);
    }
}

#[test]
fn so3_bracket_is_minus_cross_product() {
    let g: GroupoidDescriptor = GroupOverPoint::new(MatrixGroup::SO3).into();
    let (v, w) = ([0.3, -0.2, 0.5], [-0.1, 0.4, 0.2]);
    let x = AlgebroidSection::constant(&g, &MatrixGroup::SO3.hat(&v)).unwrap();
    let y = AlgebroidSection::constant(&g, &MatrixGroup::SO3.hat(&w)).unwrap();
    let b = Mat::from_vec(3, bracket_samples(&g, &x, &y, 1).unwrap().vectors[0].clone());
    // [hat v, hat w] = hat(v × w) = hat(-0.24, -0.11, 0.10).
    let cross = MatrixGroup::SO3.hat(&[-0.24, -0.11, 0.10]);
    assert!((&b + &cross).max_abs() < 1e-15);
}

#[test]
fn circle_inverse_reference_values() {
    // mpmath.findroot of y + 0.3 sin y = c.
    let f = Bisection::circle_map("x + 0.3*sin(x)").unwrap();
    let inv = f.inverse().unwrap();
    for (c, root) in [(1.0, 0.787436095723027347649), (5.0, 5.256652637688580567724)] {
        assert!(wrap_pi(inv.beta(&[c]).unwrap()[0] - root).abs() < 1e-13);
    }
}

#[test]
fn pair_flow_of_sine_field() {
    // y' = sin y has tan(y/2) = tan(y0/2)·e^t; from y0 = 1 to t = 1.
    let g: GroupoidDescriptor = PairGroupoid::circle().into();
    let x = AlgebroidSection::pair(&g, &["sin(x)"]).unwrap();
    let eta = TimeDependentSection::Constant(x);
    let e = flow(&g, &eta, &g.unit::<f64>(&[1.0]), IntegrationParams::new(0.0, 1.0, 200)).unwrap();
    assert!((e.coords[0] - 1.956294971007541740473).abs() < 1e-10);
    assert_eq!(e.coords[1], 1.0);
}

#[test]
fn first_factor_is_the_bump_scaled_displacement() {
    let gg = GaugeGroupoid::new(PrincipalBundle::reference());
    let f = Bisection::circle_map("x + 0.2*sin(x)").unwrap();
    let d = decompose_diffeo(&f, gg.bundle().partition()).unwrap();
    // Bumps exp(−1/(1 − u²)) on arcs centred at 0 and π with radius 0.95·2.2.
    let r = 0.95 * 2.2;
    let bump = |c: f64, x: f64| {
        let u = wrap_pi(x - c) / r;
        if u * u >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x: f64 = rng.gen_range(0.0..2.0 * PI);
        let lam = bump(0.0, x) / (bump(0.0, x) + bump(PI, x));
        let expect = x + lam * 0.2 * x.sin();
        assert!(wrap_pi(d.factors[0].beta(&[x]).unwrap()[0] - expect).abs() < 1e-14);
    }
}

#[test]
fn heisenberg_products_are_exact() {
    let g = GroupOverPoint::new(MatrixGroup::Heisenberg3);
    let m = |a: f64, b: f64, c: f64| Mat::<f64>::from_rows(&[&[1.0, a, c], &[0.0, 1.0, b], &[0.0, 0.0, 1.0]]);
    let p = g.compose(&g.arrow(&m(0.5, -1.25, 2.0)), &g.arrow(&m(0.75, 0.5, -0.25))).unwrap();
    // (a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b').
    assert_eq!(g.matrix(&p), m(1.25, -0.75, 2.0));
}
