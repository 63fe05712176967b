//! The tangent groupoid `TG ⇉ TM`.
//!
//! An arrow is `[c, v]`: chart coordinates `c` of an arrow of `G` followed by a
//! tangent vector `v` in the same coordinates. Every structure map is the
//! inner one evaluated on dual numbers `c + εv`.

use super::{random_with_image, Arrow, Chart, Groupoid, Point, Side, COMPOSE_TOL};
use crate::error::{Error, Result};
use crate::manifolds::BaseManifold;
use crate::numerics::dual::seed;
use crate::numerics::root::null_space;
use crate::numerics::{Dual, Mat, Scalar};
use rand::RngCore;

#[derive(Clone, Debug)]
pub struct TangentGroupoid<G> {
    inner: G,
}

fn join<S: Scalar>(x: &[Dual<S>]) -> Vec<S> {
    x.iter().map(|d| d.value).chain(x.iter().map(|d| d.deriv)).collect()
}

impl<G: Groupoid> TangentGroupoid<G> {
    pub fn new(inner: G) -> Self {
        TangentGroupoid { inner }
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }

    fn n(&self) -> usize {
        self.inner.coord_dim()
    }

    /// The tangent vector `v` at `g`, as an arrow of `TG`.
    pub fn arrow(&self, g: &Arrow, v: &[f64]) -> Arrow {
        Point::new(g.chart, g.coords.iter().chain(v).copied().collect())
    }

    /// Base arrow and tangent vector.
    pub fn parts<S: Scalar>(&self, a: &Arrow<S>) -> (Arrow<S>, Vec<S>) {
        let n = self.n();
        (Point::new(a.chart, a.coords[..n].to_vec()), a.coords[n..].to_vec())
    }

    fn lifted<S: Scalar>(&self, a: &Arrow<S>) -> Arrow<Dual<S>> {
        let n = self.n();
        Point::new(a.chart, seed(&a.coords[..n], &a.coords[n..]))
    }

    fn joined<S: Scalar>(&self, a: &Arrow<Dual<S>>) -> Arrow<S> {
        Point::new(a.chart, join(&a.coords))
    }

    /// Coefficients of `v` in the inner tangent frame at `c`, by least squares.
    fn frame_coefficients<S: Scalar>(&self, c: &Arrow<S>, v: &[S]) -> Result<Vec<S>> {
        let b = self.inner.tangent_basis(c);
        let m = b.len();
        let dot = |x: &[S], y: &[S]| x.iter().zip(y).fold(S::zero(), |acc, (&p, &q)| acc + p * q);
        let mut gram = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                gram.push(dot(&b[i], &b[j]));
            }
        }
        let inv = Mat::from_vec(m, gram)
            .inverse()
            .ok_or_else(|| Error::Precondition("degenerate tangent frame".into()))?;
        let r: Vec<S> = b.iter().map(|bi| dot(bi, v)).collect();
        Ok((0..m).map(|i| (0..m).fold(S::zero(), |acc, j| acc + inv[(i, j)] * r[j])).collect())
    }

    /// `Tm((g, u), (h, w))` in inner coordinates.
    pub fn tangent_compose(&self, g: &Arrow, u: &[f64], h: &Arrow, w: &[f64]) -> Result<(Arrow, Vec<f64>)> {
        let prod = self.compose(&self.arrow(g, u), &self.arrow(h, w))?;
        Ok(self.parts(&prod))
    }
}

impl<G: Groupoid> Groupoid for TangentGroupoid<G> {
    fn name(&self) -> String {
        format!("T{}", self.inner.name())
    }

    fn base(&self) -> BaseManifold {
        self.inner.base().tangent().expect("tangent of a supported base")
    }

    fn coord_dim(&self) -> usize {
        2 * self.n()
    }

    fn arrow_dim(&self) -> usize {
        2 * self.inner.arrow_dim()
    }

    fn source<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        join(&self.inner.source(&self.lifted(g)))
    }

    fn target<S: Scalar>(&self, g: &Arrow<S>) -> Vec<S> {
        join(&self.inner.target(&self.lifted(g)))
    }

    fn unit<S: Scalar>(&self, x: &[S]) -> Arrow<S> {
        let d = x.len() / 2;
        self.joined(&self.inner.unit(&seed(&x[..d], &x[d..])))
    }

    fn unit_in<S: Scalar>(&self, x: &[S], chart: Chart) -> Result<Arrow<S>> {
        let d = x.len() / 2;
        Ok(self.joined(&self.inner.unit_in(&seed(&x[..d], &x[d..]), chart)?))
    }

    fn target_unit_chart(&self, g: &Chart) -> Chart {
        self.inner.target_unit_chart(g)
    }

    fn source_unit_chart(&self, g: &Chart) -> Chart {
        self.inner.source_unit_chart(g)
    }

    fn invert<S: Scalar>(&self, g: &Arrow<S>) -> Arrow<S> {
        self.joined(&self.inner.invert(&self.lifted(g)))
    }

    fn compose<S: Scalar>(&self, g: &Arrow<S>, h: &Arrow<S>) -> Result<Arrow<S>> {
        let (sg, th) = (self.source(g), self.target(h));
        let d = sg.len() / 2;
        let drift = sg[d..].iter().zip(&th[d..]).map(|(a, b)| (a.value() - b.value()).abs()).fold(0.0, f64::max);
        if drift > COMPOSE_TOL {
            return Err(Error::NotComposable {
                source_point: sg.iter().map(|c| c.value()).collect(),
                target_point: th.iter().map(|c| c.value()).collect(),
            });
        }
        Ok(self.joined(&self.inner.compose(&self.lifted(g), &self.lifted(h))?))
    }

    fn to_chart<S: Scalar>(&self, g: &Arrow<S>, chart: Chart) -> Result<Arrow<S>> {
        Ok(self.joined(&self.inner.to_chart(&self.lifted(g), chart)?))
    }

    fn distance(&self, g: &Arrow, h: &Arrow) -> f64 {
        let Ok(hc) = self.to_chart(h, g.chart) else {
            return f64::INFINITY;
        };
        let (g0, v) = self.parts(g);
        let (h0, w) = self.parts(&hc);
        self.inner.distance(&g0, &h0) + v.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    fn base_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.base().distance(a, b)
    }

    /// Frame `{(b_j, Σ_k a_k Db_k[b_j])} ∪ {(0, b_k)}` where `v = Σ a_k b_k`.
    fn tangent_basis<S: Scalar>(&self, g: &Arrow<S>) -> Vec<Vec<S>> {
        let (c, v) = self.parts(g);
        let b = self.inner.tangent_basis(&c);
        let a = self.frame_coefficients(&c, &v).unwrap_or_else(|_| vec![S::zero(); b.len()]);
        let n = self.n();
        let mut out = Vec::with_capacity(2 * b.len());
        for bj in &b {
            let moved = self.inner.tangent_basis(&super::seed_point(&c, bj));
            let mut dv = vec![S::zero(); n];
            for (ak, bk) in a.iter().zip(&moved) {
                for (dvi, bki) in dv.iter_mut().zip(bk) {
                    *dvi += *ak * bki.deriv;
                }
            }
            out.push(bj.iter().copied().chain(dv).collect());
        }
        for bk in &b {
            out.push(std::iter::repeat(S::zero()).take(n).chain(bk.iter().copied()).collect());
        }
        out
    }

    fn vertical_basis(&self, g: &Arrow, side: Side) -> Vec<Vec<f64>> {
        let basis = self.tangent_basis(g);
        let images: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| match side {
                Side::Source => self.tangent_source(g, b),
                Side::Target => self.tangent_target(g, b),
            })
            .collect();
        let rows = images.first().map_or(0, |i| i.len());
        let matrix: Vec<Vec<f64>> = (0..rows).map(|r| images.iter().map(|im| im[r]).collect()).collect();
        null_space(&matrix, basis.len(), 1e-10)
            .into_iter()
            .map(|c| (0..self.coord_dim()).map(|i| c.iter().zip(&basis).map(|(ck, b)| ck * b[i]).sum()).collect())
            .collect()
    }

    fn difference<S: Scalar>(&self, p: &Arrow, q: &Arrow<S>) -> Result<Vec<S>> {
        let qc = self.to_chart(q, p.chart)?;
        let (g, v) = self.parts(p);
        let (h, w) = self.parts(&qc);
        let mut out = self.inner.difference(&g, &h)?;
        let ap = self.frame_coefficients(&g, &v)?;
        let aq = self.frame_coefficients(&h, &w)?;
        out.extend(aq.iter().zip(&ap).map(|(&x, &y)| x.shift(-y)));
        Ok(out)
    }

    fn membership_residual(&self, g: &Arrow) -> f64 {
        let (c, v) = self.parts(g);
        let Ok(a) = self.frame_coefficients(&c, &v) else {
            return f64::INFINITY;
        };
        let b = self.inner.tangent_basis(&c);
        let off = (0..v.len())
            .map(|i| v[i] - a.iter().zip(&b).map(|(ak, bk)| ak * bk[i]).sum::<f64>())
            .map(|r| r * r)
            .sum::<f64>()
            .sqrt();
        self.inner.membership_residual(&c) + off
    }

    fn random_arrow_with_target(&self, rng: &mut dyn RngCore, y: &[f64]) -> Arrow {
        let d = y.len() / 2;
        let g = self.inner.random_arrow_with_target(rng, &y[..d]);
        let v = self.inner.random_tangent_with_target_velocity(rng, &g, &y[d..]);
        self.arrow(&g, &v)
    }

    fn random_tangent_with_target_velocity(&self, rng: &mut dyn RngCore, g: &Arrow, dy: &[f64]) -> Vec<f64> {
        let basis = self.tangent_basis(g);
        let images: Vec<Vec<f64>> = basis.iter().map(|b| self.tangent_target(g, b)).collect();
        random_with_image(rng, &basis, &images, dy).expect("target map of TG is a submersion")
    }
}
