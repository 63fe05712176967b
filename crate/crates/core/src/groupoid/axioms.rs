//! Randomised certification of the groupoid axioms.

use super::{Arrow, Groupoid, Side};
use crate::error::{Error, Result};
use crate::numerics::dual::split;
use crate::numerics::Dual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Residual threshold above which [`check_axioms`] fails.
pub const AXIOM_TOL: f64 = 1e-8;

/// Agreement required between dual and central-difference tangent maps of `m`.
pub const SMOOTHNESS_TOL: f64 = 1e-6;

const FD_STEP: f64 = 1e-5;

/// Maximum residual per axiom over the sampled arrows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    pub entries: Vec<(String, f64)>,
    /// Agreement between `Tm` by duals and by central differences.
    pub smoothness: f64,
}

impl AxiomReport {
    fn record(&mut self, name: &str, r: f64) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = v.max(r),
            None => self.entries.push((name.to_string(), r)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Largest algebraic residual (smoothness excluded).
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<(&str, f64)> {
        self.entries.iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|(n, v)| (n.as_str(), *v))
    }
}

fn vertical_direction(gpd: &impl Groupoid, rng: &mut ChaCha8Rng, g: &Arrow, side: Side) -> Vec<f64> {
    let basis = gpd.vertical_basis(g, side);
    let mut v = vec![0.0; gpd.coord_dim()];
    for b in basis {
        let c: f64 = rng.gen_range(-1.0..1.0);
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += c * bi;
        }
    }
    v
}

/// `Tm` along a pair of composable directions, by duals and by central differences.
fn smoothness_residual(gpd: &impl Groupoid, g: &Arrow, h: &Arrow, u: &[f64], w: &[f64]) -> Result<f64> {
    let gh = gpd.compose(g, h)?;
    let dual = gpd.compose(&g.seeded(u), &h.seeded(w))?;
    let exact = split(&gpd.difference(&gh, &dual)?).1;
    let shifted = |s: f64| -> Result<Vec<f64>> {
        let gs = Arrow::new(g.chart, g.coords.iter().zip(u).map(|(c, d)| c + s * d).collect());
        let hs = Arrow::new(h.chart, h.coords.iter().zip(w).map(|(c, d)| c + s * d).collect());
        gpd.difference(&gh, &gpd.compose(&gs, &hs)?)
    };
    let (p, m) = (shifted(FD_STEP)?, shifted(-FD_STEP)?);
    let scale = 1.0 + exact.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(exact.iter().zip(p.iter().zip(&m)).map(|(e, (a, b))| (e - (a - b) / (2.0 * FD_STEP)).abs()).fold(0.0, f64::max) / scale)
}

/// Compute the report without enforcing a threshold.
pub fn axiom_report(gpd: &impl Groupoid, n_samples: usize, seed: u64) -> Result<AxiomReport> {
    if n_samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = AxiomReport { samples: n_samples, ..Default::default() };
    for _ in 0..n_samples {
        let g = gpd.random_arrow(&mut rng);
        let h = gpd.random_arrow_with_target(&mut rng, &gpd.source(&g));
        let k = gpd.random_arrow_with_target(&mut rng, &gpd.source(&h));
        let gh = gpd.compose(&g, &h)?;
        let hk = gpd.compose(&h, &k)?;
        let lhs = gpd.compose(&gh, &k)?;
        let rhs = gpd.compose(&g, &hk)?;
        rep.record("associativity", gpd.distance(&lhs, &rhs));
        rep.record("source of product", gpd.base_distance(&gpd.source(&gh), &gpd.source(&h)));
        rep.record("target of product", gpd.base_distance(&gpd.target(&gh), &gpd.target(&g)));

        let (sg, tg) = (gpd.source(&g), gpd.target(&g));
        let ut = gpd.unit_in(&tg, gpd.target_unit_chart(&g.chart))?;
        let us = gpd.unit_in(&sg, gpd.source_unit_chart(&g.chart))?;
        rep.record("left unit", gpd.distance(&gpd.compose(&ut, &g)?, &g));
        rep.record("right unit", gpd.distance(&gpd.compose(&g, &us)?, &g));
        for u in [&ut, &us] {
            let x = gpd.source(u);
            rep.record("unit is a loop", gpd.base_distance(&x, &gpd.target(u)));
        }
        rep.record("source of unit", gpd.base_distance(&gpd.source(&us), &sg));
        rep.record("target of unit", gpd.base_distance(&gpd.target(&ut), &tg));

        let gi = gpd.invert(&g);
        rep.record("left inverse", gpd.distance(&gpd.compose(&gi, &g)?, &us));
        rep.record("right inverse", gpd.distance(&gpd.compose(&g, &gi)?, &ut));
        rep.record("source of inverse", gpd.base_distance(&gpd.source(&gi), &tg));
        rep.record("target of inverse", gpd.base_distance(&gpd.target(&gi), &sg));
        rep.record("involution", gpd.distance(&gpd.invert(&gi), &g));
        rep.record("unit inverse", gpd.distance(&gpd.invert(&ut), &ut));

        for a in [&gh, &lhs, &gi] {
            rep.record("membership", gpd.membership_residual(a));
        }

        let u = vertical_direction(gpd, &mut rng, &g, Side::Source);
        let w = vertical_direction(gpd, &mut rng, &h, Side::Target);
        rep.smoothness = rep.smoothness.max(smoothness_residual(gpd, &g, &h, &u, &w)?);
    }
    Ok(rep)
}

/// Certify the axioms on `n_samples` random composable triples.
///
/// Fails with the first axiom whose residual exceeds [`AXIOM_TOL`], or if the
/// dual-number tangent map of the multiplication disagrees with central
/// differences by more than [`SMOOTHNESS_TOL`].
pub fn check_axioms(gpd: &impl Groupoid, n_samples: usize, seed: u64) -> Result<AxiomReport> {
    let rep = axiom_report(gpd, n_samples, seed)?;
    if let Some((name, r)) = rep.worst() {
        if r > AXIOM_TOL {
            return Err(Error::AxiomViolation { axiom: name.to_string(), residual: r, tol: AXIOM_TOL });
        }
    }
    if rep.smoothness > SMOOTHNESS_TOL {
        return Err(Error::AxiomViolation { axiom: "smoothness".into(), residual: rep.smoothness, tol: SMOOTHNESS_TOL });
    }
    Ok(rep)
}

/// Derivative of `compose` along a single joint direction, for external checks.
pub fn tangent_of_compose(gpd: &impl Groupoid, g: &Arrow, u: &[f64], h: &Arrow, w: &[f64]) -> Result<Vec<f64>> {
    let prod: Arrow<Dual> = gpd.compose(&g.seeded(u), &h.seeded(w))?;
    Ok(prod.split().1)
}
