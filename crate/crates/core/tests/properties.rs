use lie_bisections::algebroid::{
    algebroid_bracket, anchor_morphism_residual, bracket_samples, right_invariance_residual, AlgebroidSection, SampledSection,
};
use lie_bisections::bisection::Bisection;
use lie_bisections::expr::Expr;
use lie_bisections::flow::{flow_properties_check, TimeDependentSection};
use lie_bisections::gauge_extension::{beta_star, decompose_diffeo};
use lie_bisections::groupoid::{
    GaugeGroupoid, GroupOverPoint, Groupoid, GroupoidDescriptor, Morphism, PairGroupoid, PrincipalBundle,
};
use lie_bisections::local_addition::{check_adapted, zero_residual, LocalAddition};
use lie_bisections::manifolds::MatrixGroup;
use lie_bisections::numerics::root::wrap_pi;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn pair() -> GroupoidDescriptor {
    PairGroupoid::circle().into()
}

fn gauge() -> GaugeGroupoid {
    GaugeGroupoid::new(PrincipalBundle::reference())
}

fn fourier(seed: u64) -> Bisection {
    Bisection::random_fourier(&mut ChaCha8Rng::seed_from_u64(seed), 3, 0.45).with_grid(64)
}

/// A trigonometric coefficient `a + b sin x + c cos 2x`.
fn trig() -> impl Strategy<Value = String> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| format!("{a} + {b}*sin(x) + {c}*cos(2*x)"))
}

fn sup(a: &SampledSection) -> f64 {
    a.sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn star_group_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (fourier(a), fourier(b), fourier(c));
        let one = Bisection::unit(PairGroupoid::circle()).with_grid(64);
        prop_assert!(a.star(&b).unwrap().star(&c).unwrap().sup_distance(&a.star(&b.star(&c).unwrap()).unwrap()).unwrap() < 1e-8);
        prop_assert!(a.star(&one).unwrap().sup_distance(&a).unwrap() < 1e-12);
        prop_assert!(one.star(&a).unwrap().sup_distance(&a).unwrap() < 1e-12);
        let ai = a.inverse().unwrap();
        prop_assert!(a.star(&ai).unwrap().sup_distance(&one).unwrap() < 1e-8);
        prop_assert!(ai.star(&a).unwrap().sup_distance(&one).unwrap() < 1e-8);
    }

    #[test]
    fn beta_map_is_composition(a in any::<u64>(), b in any::<u64>(), x in 0.0..6.28f64) {
        let (a, b) = (fourier(a), fourier(b));
        let lhs = a.star(&b).unwrap().beta(&[x]).unwrap()[0];
        let rhs = a.beta(&b.beta(&[x]).unwrap()).unwrap()[0];
        prop_assert!(wrap_pi(lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn action_is_a_homomorphism(a in any::<u64>(), b in any::<u64>(), seed in any::<u64>()) {
        let (a, b) = (fourier(a), fourier(b));
        let p = PairGroupoid::circle();
        let g = p.random_arrow(&mut ChaCha8Rng::seed_from_u64(seed));
        let lhs = a.star(&b).unwrap().act(&g).unwrap();
        let rhs = a.act(&b.act(&g).unwrap()).unwrap();
        prop_assert!(p.distance(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(x in trig(), y in trig(), z in trig(), c in -2.0..2.0f64) {
        let g = pair();
        let sec = |s: &str| AlgebroidSection::pair(&g, &[s]).unwrap();
        let (x, y, z) = (sec(&x), sec(&y), sec(&z));
        let xy = bracket_samples(&g, &x, &y, 32).unwrap();
        let yx = bracket_samples(&g, &y, &x, 32).unwrap();
        prop_assert!(sup(&xy.combine(1.0, &yx).unwrap()) < 1e-9 * (1.0 + sup(&xy)));
        let lin = bracket_samples(&g, &x.clone().plus(z.clone().scaled(c)), &y, 32).unwrap();
        let xz = bracket_samples(&g, &z, &y, 32).unwrap();
        let sum = xy.combine(c, &xz).unwrap();
        prop_assert!(lin.sup_distance(&sum).unwrap() < 1e-9 * (1.0 + sup(&lin)));
    }

    #[test]
    fn jacobi_identity(x in trig(), y in trig(), z in trig()) {
        let g = pair();
        let sec = |s: &str| AlgebroidSection::pair(&g, &[s]).unwrap();
        let (x, y, z) = (sec(&x), sec(&y), sec(&z));
        let n = 64;
        let outer = |a: &AlgebroidSection, b: &AlgebroidSection, c: &AlgebroidSection| {
            let bc = algebroid_bracket(&g, b, c, n).unwrap();
            bracket_samples(&g, a, &bc, n).unwrap()
        };
        let total = outer(&x, &y, &z).combine(1.0, &outer(&y, &z, &x)).unwrap().combine(1.0, &outer(&z, &x, &y)).unwrap();
        prop_assert!(sup(&total) < 1e-6, "{}", sup(&total));
    }

    #[test]
    fn anchor_preserves_brackets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in [pair(), gauge().into()] {
            let x = AlgebroidSection::random(&g, &mut rng, 0.5);
            let y = AlgebroidSection::random(&g, &mut rng, 0.5);
            prop_assert!(anchor_morphism_residual(&g, &x, &y, 16).unwrap() < 1e-6);
        }
    }

    #[test]
    fn extensions_are_right_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in [pair(), GroupOverPoint::new(MatrixGroup::SO3).into(), gauge().into()] {
            let x = AlgebroidSection::random(&g, &mut rng, 0.5);
            prop_assert!(right_invariance_residual(&g, &x, 20, seed).unwrap() < 1e-9);
        }
    }

    #[test]
    fn additions_fix_zero_and_preserve_fibres(seed in any::<u64>()) {
        let gd: GroupoidDescriptor = gauge().into();
        for g in [pair(), GroupOverPoint::new(MatrixGroup::SO3).into(), gd] {
            let a = LocalAddition::for_groupoid(&g);
            prop_assert!(zero_residual(&a, &g, 20, seed).unwrap() < 1e-14);
            prop_assert!(check_adapted(&a, &g, 20, seed).unwrap().max_drift < 1e-12);
        }
    }

    #[test]
    fn flows_satisfy_the_cocycle_law(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = pair();
        let eta = Arc::new(TimeDependentSection::random(&g, &mut rng, 0.5));
        let rep = flow_properties_check(&g, &eta, 5, seed, 50, 32).unwrap();
        prop_assert!(rep.cocycle < 1e-6 && rep.equivariance < 1e-8 && rep.alpha_invariance < 1e-12);
        prop_assert!(rep.diffeomorphisms);
    }

    #[test]
    fn decomposition_telescopes(a in -0.2..0.2f64, b in -0.1..0.1f64, c in -0.3..0.3f64) {
        let f = Bisection::circle_map(&format!("x + {a}*sin(x) + {b}*cos(2*x) + {c}")).unwrap().with_grid(128);
        let d = decompose_diffeo(&f, gauge().bundle().partition()).unwrap();
        prop_assert!(d.telescoping < 1e-9);
        prop_assert!(d.support < 1e-14);
    }

    #[test]
    fn beta_star_is_a_homomorphism(seed in any::<u64>()) {
        let gg = gauge();
        let gd: GroupoidDescriptor = gg.clone().into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let make = |rng: &mut ChaCha8Rng| {
            let s = AlgebroidSection::random(&gd, rng, 0.3);
            Bisection::addition(gd.clone(), s, 1.0, LocalAddition::for_groupoid(&gd)).with_grid(64)
        };
        let (s, t) = (make(&mut rng), make(&mut rng));
        prop_assume!(s.is_bisection() && t.is_bisection());
        let lhs = beta_star(&s.star(&t).unwrap()).unwrap();
        let rhs = beta_star(&s).unwrap().star(&beta_star(&t).unwrap()).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-9);
        let f = Morphism::anchor(gd.clone());
        prop_assert!(s.star(&t).unwrap().pushforward(&f).unwrap().sup_distance(&lhs).unwrap() < 1e-12);
    }

    #[test]
    fn expressions_evaluate_like_rust(a in -3.0..3.0f64, b in 0.5..3.0f64) {
        let e = Expr::parse("sin(a)*cos(b) - exp(a/b) + pi*a", &["a", "b"]).unwrap();
        let expect = a.sin() * b.cos() - (a / b).exp() + std::f64::consts::PI * a;
        prop_assert!((e.eval::<f64>(&[a, b]) - expect).abs() < 1e-12);
    }
}
