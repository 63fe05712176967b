//! Arc covers of the circle and bump-function partitions of unity.

use crate::error::{Error, Result};
use crate::numerics::root::wrap_pi;
use crate::numerics::Scalar;
use std::f64::consts::PI;

/// An open arc `(center − half_width, center + half_width)` of the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartArc {
    pub center: f64,
    pub half_width: f64,
}

impl ChartArc {
    pub fn new(center: f64, half_width: f64) -> Self {
        ChartArc { center, half_width }
    }

    /// From explicit endpoints `a < b` on the lift.
    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::Config(format!("arc endpoints must satisfy a < b, got ({a}, {b})")));
        }
        Ok(ChartArc { center: 0.5 * (a + b), half_width: 0.5 * (b - a) })
    }

    /// The arc covering the whole circle.
    pub fn whole(center: f64) -> Self {
        ChartArc { center, half_width: f64::INFINITY }
    }

    pub fn covers_circle(&self) -> bool {
        self.half_width > PI
    }

    /// Angular distance of `x` from the center.
    pub fn offset(&self, x: f64) -> f64 {
        wrap_pi(x - self.center).abs()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.covers_circle() || self.offset(x) < self.half_width
    }

    /// Relative depth: 1 at the center, 0 on the boundary.
    pub fn depth(&self, x: f64) -> f64 {
        if self.covers_circle() {
            1.0 - self.offset(x) / (2.0 * PI)
        } else {
            1.0 - self.offset(x) / self.half_width
        }
    }

    /// Whether `x` lies in the middle two-thirds of the arc.
    pub fn in_core(&self, x: f64) -> bool {
        self.covers_circle() || self.offset(x) <= 2.0 * self.half_width / 3.0
    }

    /// Representative of `x` in `[center − π, center + π)`, preserving derivatives.
    pub fn rep<S: Scalar>(&self, x: S) -> S {
        let v = x.value();
        x.shift(self.center + wrap_pi(v - self.center) - v)
    }
}

/// A finite cover of the circle by arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub arcs: Vec<ChartArc>,
}

impl Cover {
    pub fn new(arcs: Vec<ChartArc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Config("cover needs at least one arc".into()));
        }
        let cover = Cover { arcs };
        for k in 0..720 {
            let x = 2.0 * PI * k as f64 / 720.0;
            if cover.charts_at(x).is_empty() {
                return Err(Error::Config(format!("arcs do not cover the circle near {x:.4}")));
            }
        }
        Ok(cover)
    }

    /// Two arcs centred at 0 and π with half-width 2.2.
    pub fn two_arcs() -> Self {
        Cover { arcs: vec![ChartArc::new(0.0, 2.2), ChartArc::new(PI, 2.2)] }
    }

    /// `n ≥ 2` equal arcs centred at `2πi/n`, overlapping by the given fraction of the spacing.
    pub fn uniform(n: usize, overlap: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("uniform cover needs n ≥ 2".into()));
        }
        let spacing = 2.0 * PI / n as f64;
        Cover::new((0..n).map(|i| ChartArc::new(i as f64 * spacing, 0.5 * spacing * (1.0 + overlap))).collect())
    }

    pub fn single() -> Self {
        Cover { arcs: vec![ChartArc::whole(0.0)] }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Indices of arcs containing `x`.
    pub fn charts_at(&self, x: f64) -> Vec<usize> {
        (0..self.arcs.len()).filter(|&i| self.arcs[i].contains(x)).collect()
    }

    /// The arc in which `x` lies deepest.
    pub fn best_chart(&self, x: f64) -> usize {
        (0..self.arcs.len())
            .max_by(|&i, &j| self.arcs[i].depth(x).total_cmp(&self.arcs[j].depth(x)))
            .expect("cover is non-empty")
    }

    /// Whether arcs `i` and `j` intersect.
    pub fn overlaps(&self, i: usize, j: usize) -> bool {
        (0..720).any(|k| {
            let x = 2.0 * PI * k as f64 / 720.0;
            self.arcs[i].contains(x) && self.arcs[j].contains(x)
        })
    }
}

/// Partition of unity subordinate to a cover, built from `exp(−1/(1−u²))` bumps.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    cover: Cover,
    radii: Vec<f64>,
}

/// Fraction of the half-width used as bump support radius.
pub const SUPPORT_FRACTION: f64 = 0.95;

impl PartitionOfUnity {
    pub fn new(cover: Cover) -> Result<Self> {
        let radii: Vec<f64> = cover
            .arcs
            .iter()
            .map(|a| if a.covers_circle() { f64::INFINITY } else { SUPPORT_FRACTION * a.half_width })
            .collect();
        let pou = PartitionOfUnity { cover, radii };
        for k in 0..4096 {
            let x = 2.0 * PI * k as f64 / 4096.0;
            let total: f64 = (0..pou.len()).map(|i| pou.bump::<f64>(i, x)).sum();
            if total <= 1e-12 {
                return Err(Error::Config(format!("bump supports do not cover the circle near {x:.4}")));
            }
        }
        Ok(pou)
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Support radius of bump `i` around the arc center.
    pub fn support_radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn in_support(&self, i: usize, x: f64) -> bool {
        self.cover.arcs[i].offset(x) < self.radii[i]
    }

    pub fn bump<S: Scalar>(&self, i: usize, x: S) -> S {
        let arc = self.cover.arcs[i];
        if self.radii[i].is_infinite() {
            return S::one();
        }
        let u = (arc.rep(x) - S::from_f64(arc.center)).scale(1.0 / self.radii[i]);
        let u2 = u * u;
        if u2.value() >= 1.0 {
            return S::zero();
        }
        (-(S::one() / (S::one() - u2))).exp()
    }

    /// `λ_i(x)`.
    pub fn eval<S: Scalar>(&self, i: usize, x: S) -> S {
        let b = self.bump(i, x);
        if b.value() == 0.0 {
            return S::zero();
        }
        let total = (0..self.len()).fold(S::zero(), |acc, l| acc + self.bump(l, x));
        b / total
    }

    /// Partial sum `Λ_i = λ_1 + … + λ_i` (one-based; `Λ_0 = 0`).
    pub fn partial_sum<S: Scalar>(&self, i: usize, x: S) -> S {
        (0..i).fold(S::zero(), |acc, l| acc + self.eval(l, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dual::derivative;

    #[test]
    fn representatives() {
        let a = ChartArc::new(PI, 2.2);
        assert!((a.rep(-0.1f64) - (2.0 * PI - 0.1)).abs() < 1e-15);
        assert!(a.contains(5.0) && !a.contains(0.3));
        assert!(Cover::two_arcs().overlaps(0, 1));
    }

    #[test]
    fn partition_sums_to_one() {
        let pou = PartitionOfUnity::new(Cover::two_arcs()).unwrap();
        for k in 0..500 {
            let x = 0.0127 * k as f64;
            let s: f64 = (0..2).map(|i| pou.eval(i, x)).sum();
            assert!((s - 1.0).abs() < 1e-14);
            let ds: f64 = (0..2).map(|i| derivative(|t| pou.eval(i, t), x)).sum();
            assert!(ds.abs() < 1e-12);
        }
    }

    #[test]
    fn supports_are_exact() {
        let pou = PartitionOfUnity::new(Cover::uniform(5, 0.5).unwrap()).unwrap();
        for k in 0..1000 {
            let x = 2.0 * PI * k as f64 / 1000.0;
            for i in 0..5 {
                if !pou.in_support(i, x) {
                    assert_eq!(pou.eval(i, x), 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_gappy_cover() {
        assert!(Cover::new(vec![ChartArc::new(0.0, 1.0), ChartArc::new(PI, 1.0)]).is_err());
    }
}
