use crate::error::{Error, Result};
use crate::numerics::matrix::{lift_mat, real_part};
use crate::numerics::{Mat, Scalar};
use rand::Rng;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Margin kept from the cut locus of the SO(3) logarithm.
pub const SO3_LOG_MARGIN: f64 = 1e-6;

/// A closed subgroup of GL(n) given by a Lie algebra basis and a membership residual.
pub struct LinearSubgroup {
    pub name: String,
    pub n: usize,
    pub basis: Vec<Mat>,
    pub membership: fn(&Mat) -> f64,
}

impl fmt::Debug for LinearSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearSubgroup({}, n = {})", self.name, self.n)
    }
}

/// Matrix Lie groups used as vertex groups.
#[derive(Clone, Debug)]
pub enum MatrixGroup {
    SO3,
    Heisenberg3,
    Subgroup(Arc<LinearSubgroup>),
}

impl PartialEq for MatrixGroup {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (MatrixGroup::SO3, MatrixGroup::SO3) => true,
            (MatrixGroup::Heisenberg3, MatrixGroup::Heisenberg3) => true,
            (MatrixGroup::Subgroup(a), MatrixGroup::Subgroup(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

fn e(n: usize, i: usize, j: usize, v: f64) -> Mat {
    let mut m = Mat::zeros(n);
    m[(i, j)] = v;
    m
}

fn so3_basis() -> Vec<Mat> {
    vec![
        &e(3, 2, 1, 1.0) + &e(3, 1, 2, -1.0),
        &e(3, 0, 2, 1.0) + &e(3, 2, 0, -1.0),
        &e(3, 1, 0, 1.0) + &e(3, 0, 1, -1.0),
    ]
}

/// `ω ↦ ω̂` for so(3).
pub fn so3_hat<S: Scalar>(w: &[S]) -> Mat<S> {
    let z = S::zero();
    Mat::from_vec(3, vec![z, -w[2], w[1], w[2], z, -w[0], -w[1], w[0], z])
}

/// Axis vector of the skew part of a 3×3 matrix.
pub fn so3_vee<S: Scalar>(m: &Mat<S>) -> Vec<S> {
    vec![
        (m[(2, 1)] - m[(1, 2)]).scale(0.5),
        (m[(0, 2)] - m[(2, 0)]).scale(0.5),
        (m[(1, 0)] - m[(0, 1)]).scale(0.5),
    ]
}

fn so3_exp<S: Scalar>(v: &Mat<S>) -> Mat<S> {
    let w = so3_vee(v);
    let wh = so3_hat(&w);
    let t2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let (a, b) = if t2.value() < 1e-8 {
        let t4 = t2 * t2;
        (
            S::one() - t2.scale(1.0 / 6.0) + t4.scale(1.0 / 120.0),
            S::from_f64(0.5) - t2.scale(1.0 / 24.0) + t4.scale(1.0 / 720.0),
        )
    } else {
        let t = t2.sqrt();
        (t.sin() / t, (S::one() - t.cos()) / t2)
    };
    let w2 = &wh * &wh;
    &(&Mat::identity(3) + &wh.scale(a)) + &w2.scale(b)
}

fn so3_log<S: Scalar>(g: &Mat<S>) -> Result<Mat<S>> {
    let s = so3_vee(g);
    let c = (g.trace() - S::one()).scale(0.5);
    let s2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    let theta = s2.value().sqrt().atan2(c.value());
    if theta > PI - SO3_LOG_MARGIN {
        return Err(Error::OutOfChart(format!("SO(3) logarithm at rotation angle {theta}")));
    }
    let factor = if s2.value() < 1e-8 && c.value() > 0.0 {
        // θ / sin θ expanded in sin²θ.
        S::one() + s2.scale(1.0 / 6.0) + (s2 * s2).scale(3.0 / 40.0)
    } else {
        let sn = s2.sqrt();
        sn.atan2(c) / sn
    };
    Ok(so3_hat(&s).scale(factor))
}

fn heis_basis() -> Vec<Mat> {
    vec![e(3, 0, 1, 1.0), e(3, 1, 2, 1.0), e(3, 0, 2, 1.0)]
}

impl MatrixGroup {
    pub fn name(&self) -> String {
        match self {
            MatrixGroup::SO3 => "SO3".into(),
            MatrixGroup::Heisenberg3 => "Heisenberg3".into(),
            MatrixGroup::Subgroup(s) => s.name.clone(),
        }
    }

    /// Size of the matrices.
    pub fn n(&self) -> usize {
        match self {
            MatrixGroup::SO3 | MatrixGroup::Heisenberg3 => 3,
            MatrixGroup::Subgroup(s) => s.n,
        }
    }

    pub fn algebra_basis(&self) -> Vec<Mat> {
        match self {
            MatrixGroup::SO3 => so3_basis(),
            MatrixGroup::Heisenberg3 => heis_basis(),
            MatrixGroup::Subgroup(s) => s.basis.clone(),
        }
    }

    pub fn algebra_dim(&self) -> usize {
        match self {
            MatrixGroup::SO3 | MatrixGroup::Heisenberg3 => 3,
            MatrixGroup::Subgroup(s) => s.basis.len(),
        }
    }

    /// `Σ c_k E_k`.
    pub fn hat<S: Scalar>(&self, c: &[S]) -> Mat<S> {
        match self {
            MatrixGroup::SO3 => so3_hat(c),
            _ => {
                let basis = self.algebra_basis();
                let mut m = Mat::zeros(self.n());
                for (ck, ek) in c.iter().zip(&basis) {
                    m = &m + &lift_mat::<S>(ek).scale(*ck);
                }
                m
            }
        }
    }

    /// Coordinates of an algebra element in the basis (least squares for general subgroups).
    pub fn vee<S: Scalar>(&self, v: &Mat<S>) -> Vec<S> {
        match self {
            MatrixGroup::SO3 => so3_vee(v),
            MatrixGroup::Heisenberg3 => vec![v[(0, 1)], v[(1, 2)], v[(0, 2)]],
            MatrixGroup::Subgroup(_) => {
                let basis = self.algebra_basis();
                let k = basis.len();
                let dot = |a: &Mat, b: &Mat| a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum::<f64>();
                let gram = Mat::from_vec(k, (0..k).flat_map(|i| (0..k).map(|j| dot(&basis[i], &basis[j])).collect::<Vec<_>>()).collect());
                let gi = gram.inverse().expect("algebra basis is linearly independent");
                let rhs: Vec<S> = basis
                    .iter()
                    .map(|b| b.as_slice().iter().zip(v.as_slice()).fold(S::zero(), |acc, (&x, &y)| acc + y.scale(x)))
                    .collect();
                (0..k).map(|i| (0..k).fold(S::zero(), |acc, j| acc + rhs[j].scale(gi[(i, j)]))).collect()
            }
        }
    }

    pub fn identity<S: Scalar>(&self) -> Mat<S> {
        Mat::identity(self.n())
    }

    pub fn mul<S: Scalar>(&self, a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
        a * b
    }

    pub fn inverse<S: Scalar>(&self, g: &Mat<S>) -> Mat<S> {
        match self {
            MatrixGroup::SO3 => g.transpose(),
            MatrixGroup::Heisenberg3 => {
                let (a, b, c) = (g[(0, 1)], g[(1, 2)], g[(0, 2)]);
                let mut m = Mat::identity(3);
                m[(0, 1)] = -a;
                m[(1, 2)] = -b;
                m[(0, 2)] = a * b - c;
                m
            }
            MatrixGroup::Subgroup(_) => g.inverse().expect("group element is invertible"),
        }
    }

    pub fn exp<S: Scalar>(&self, v: &Mat<S>) -> Mat<S> {
        match self {
            MatrixGroup::SO3 => so3_exp(v),
            MatrixGroup::Heisenberg3 => {
                let v2 = v * v;
                &(&Mat::identity(3) + v) + &v2.scale(S::from_f64(0.5))
            }
            MatrixGroup::Subgroup(_) => v.expm(),
        }
    }

    pub fn log<S: Scalar>(&self, g: &Mat<S>) -> Result<Mat<S>> {
        match self {
            MatrixGroup::SO3 => so3_log(g),
            MatrixGroup::Heisenberg3 => {
                let x = g - &Mat::identity(3);
                let x2 = &x * &x;
                Ok(&x - &x2.scale(S::from_f64(0.5)))
            }
            MatrixGroup::Subgroup(_) => g
                .logm()
                .ok_or_else(|| Error::OutOfChart(format!("logarithm undefined in {}", self.name()))),
        }
    }

    /// `Ad(k) V = k V k⁻¹`.
    pub fn adjoint<S: Scalar>(&self, k: &Mat<S>, v: &Mat<S>) -> Mat<S> {
        &(k * v) * &self.inverse(k)
    }

    /// Radius of the ball in algebra coordinates on which `exp` is a diffeomorphism
    /// (with a safety margin), used as the domain of the group addition.
    pub fn exp_radius(&self) -> f64 {
        match self {
            MatrixGroup::SO3 => PI - SO3_LOG_MARGIN,
            MatrixGroup::Heisenberg3 => f64::INFINITY,
            MatrixGroup::Subgroup(_) => 1.0,
        }
    }

    /// Size of an algebra element measured against [`MatrixGroup::exp_radius`].
    pub fn algebra_norm(&self, v: &Mat) -> f64 {
        match self {
            MatrixGroup::SO3 => {
                let w = so3_vee(v);
                (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
            }
            _ => v.norm(),
        }
    }

    /// Distance from the group, zero for members.
    pub fn membership_residual(&self, g: &Mat) -> f64 {
        match self {
            MatrixGroup::SO3 => {
                (&(&g.transpose() * g) - &Mat::identity(3)).max_abs() + (g.determinant() - 1.0).abs()
            }
            MatrixGroup::Heisenberg3 => {
                let mut r: f64 = 0.0;
                for i in 0..3 {
                    r = r.max((g[(i, i)] - 1.0).abs());
                    for j in 0..i {
                        r = r.max(g[(i, j)].abs());
                    }
                }
                r
            }
            MatrixGroup::Subgroup(s) => (s.membership)(g),
        }
    }

    pub fn random_algebra(&self, rng: &mut (impl Rng + ?Sized), scale: f64) -> Mat {
        let c: Vec<f64> = (0..self.algebra_dim()).map(|_| rng.gen_range(-scale..scale)).collect();
        self.hat(&c)
    }

    pub fn random_element(&self, rng: &mut (impl Rng + ?Sized)) -> Mat {
        let scale = match self {
            MatrixGroup::SO3 => 1.5,
            MatrixGroup::Heisenberg3 => 1.0,
            MatrixGroup::Subgroup(_) => 0.4,
        };
        self.exp(&self.random_algebra(rng, scale))
    }

    /// Re-project a drifted element onto the group (polar factor for SO(3)).
    pub fn project(&self, g: &Mat) -> Mat {
        match self {
            MatrixGroup::SO3 => {
                let mut q = g.clone();
                for _ in 0..30 {
                    let qi = q.inverse().expect("invertible").transpose();
                    let next = (&q + &qi).scale(0.5);
                    let d = (&next - &q).max_abs();
                    q = next;
                    if d < 1e-16 {
                        break;
                    }
                }
                q
            }
            _ => g.clone(),
        }
    }

    /// Distance between two elements (Frobenius norm of the difference).
    pub fn distance(&self, a: &Mat, b: &Mat) -> f64 {
        (a - b).norm()
    }
}

/// Real part of a matrix over any scalar.
pub fn values<S: Scalar>(m: &Mat<S>) -> Mat {
    real_part(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Dual;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rodrigues_matches_scaling_and_squaring() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = MatrixGroup::SO3;
        for _ in 0..200 {
            let v = g.random_algebra(&mut rng, 2.0);
            assert!((&g.exp(&v) - &v.expm()).max_abs() < 1e-13);
        }
        let tiny = g.hat(&[1e-6, -2e-6, 3e-7]);
        assert!((&g.exp(&tiny) - &tiny.expm()).max_abs() < 1e-16);
    }

    #[test]
    fn log_inverts_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in [MatrixGroup::SO3, MatrixGroup::Heisenberg3] {
            for _ in 0..200 {
                let v = g.random_algebra(&mut rng, 1.0);
                let l = g.log(&g.exp(&v)).unwrap();
                assert!((&l - &v).max_abs() < 1e-12, "{}", g.name());
            }
        }
        let small = MatrixGroup::SO3.hat(&[1e-7, 0.0, 2e-7]);
        let l = MatrixGroup::SO3.log(&MatrixGroup::SO3.exp(&small)).unwrap();
        assert!((&l - &small).max_abs() < 1e-20);
    }

    #[test]
    fn log_refuses_near_pi() {
        let g = MatrixGroup::SO3;
        let r = g.exp(&g.hat(&[0.0, 0.0, PI - 1e-8]));
        assert!(matches!(g.log(&r), Err(Error::OutOfChart(_))));
    }

    #[test]
    fn exp_derivative_at_zero_is_identity_map() {
        let g = MatrixGroup::SO3;
        let w = [0.3, -0.2, 0.5];
        let seeded: Vec<Dual> = w.iter().map(|&c| Dual::new(0.0, c)).collect();
        let e = g.exp(&so3_hat(&seeded));
        let d = e.map(|x| x.deriv);
        assert!((&d - &g.hat(&w)).max_abs() < 1e-15);
    }

    #[test]
    fn adjoint_is_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = MatrixGroup::SO3;
        let k = g.random_element(&mut rng);
        let v = g.random_algebra(&mut rng, 1.0);
        let lhs = g.exp(&g.adjoint(&k, &v));
        let rhs = &(&k * &g.exp(&v)) * &g.inverse(&k);
        assert!((&lhs - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn membership_and_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = MatrixGroup::SO3;
        let k = g.random_element(&mut rng);
        assert!(g.membership_residual(&k) < 1e-14);
        let drifted = &k + &Mat::from_vec(3, vec![1e-6; 9]);
        assert!(g.membership_residual(&g.project(&drifted)) < 1e-14);
        let h = MatrixGroup::Heisenberg3.random_element(&mut rng);
        assert!(MatrixGroup::Heisenberg3.membership_residual(&h) == 0.0);
    }

    #[test]
    fn general_subgroup_so2() {
        fn so2_residual(g: &Mat) -> f64 {
            (&(&g.transpose() * g) - &Mat::identity(2)).max_abs()
        }
        let basis: Mat = Mat::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let grp = MatrixGroup::Subgroup(Arc::new(LinearSubgroup {
            name: "SO2".into(),
            n: 2,
            basis: vec![basis],
            membership: so2_residual,
        }));
        let g = grp.exp(&grp.hat(&[0.7]));
        assert!((g[(0, 0)] - 0.7f64.cos()).abs() < 1e-14);
        assert!(grp.membership_residual(&g) < 1e-14);
        assert!((grp.vee(&grp.log(&g).unwrap())[0] - 0.7).abs() < 1e-12);
    }
}
