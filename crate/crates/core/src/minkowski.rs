//! Minkowski space primitives with signature (-, -, -, +).
//!
//! Components are ordered `(q1, q2, q3, q4)` with `q4 = c t` the time
//! coordinate. The same type carries points and tangent vectors.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// A contravariant four-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    /// Panics on non-finite components.
    pub fn new(components: [f64; 4]) -> Self {
        Self::try_new(components).expect("four-vector components must be finite")
    }

    pub fn try_new(components: [f64; 4]) -> Option<Self> {
        components
            .iter()
            .all(|x| x.is_finite())
            .then_some(FourVector(components))
    }

    pub fn from_parts(spatial: Vec3, temporal: f64) -> Self {
        FourVector([spatial[0], spatial[1], spatial[2], temporal])
    }

    pub fn spatial(&self) -> Vec3 {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn temporal(&self) -> f64 {
        self.0[3]
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for FourVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, rhs: FourVector) -> FourVector {
        FourVector(rhs.0.map(|x| self * x))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|x| -x))
    }
}

/// The flat metric `diag(-1, -1, -1, +1)` together with the run's speed of light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub c: f64,
}

impl Default for Metric {
    fn default() -> Self {
        Metric { c: 1.0 }
    }
}

impl Metric {
    pub const SIGNATURE: [f64; 4] = [-1.0, -1.0, -1.0, 1.0];

    pub fn new(c: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "speed of light must be positive");
        Metric { c }
    }

    pub fn contract(&self, u: &FourVector, w: &FourVector) -> f64 {
        metric_contract(u, w)
    }

    pub fn constraint_residual(&self, u: &FourVector, mass_squared: f64) -> f64 {
        constraint_residual(u, mass_squared, self.c)
    }
}

/// Covariant components `p_sigma = g_{sigma nu} u^nu` of the four-momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourMomentum {
    pub covariant: [f64; 4],
}

impl FourMomentum {
    /// Contravariant components (equal to the generating velocity).
    pub fn contravariant(&self) -> [f64; 4] {
        let p = self.covariant;
        [-p[0], -p[1], -p[2], p[3]]
    }

    /// Three-momentum `p^l` and energy `E = c p_4` in the 3+1 split.
    pub fn split(&self, c: f64) -> (Vec3, f64) {
        let up = self.contravariant();
        ([up[0], up[1], up[2]], c * up[3])
    }

    /// `p_sigma u^sigma`.
    pub fn pair(&self, u: &FourVector) -> f64 {
        (0..4).map(|i| self.covariant[i] * u[i]).sum()
    }
}

/// `u^4 w^4 - sum_p u^p w^p`.
pub fn metric_contract(u: &FourVector, w: &FourVector) -> f64 {
    u[3] * w[3] - (u[0] * w[0] + u[1] * w[1] + u[2] * w[2])
}

pub fn lower(u: &FourVector) -> FourMomentum {
    FourMomentum {
        covariant: [-u[0], -u[1], -u[2], u[3]],
    }
}

/// `g(u, u) - M c^2`; zero exactly on the constraint submanifold.
pub fn constraint_residual(u: &FourVector, mass_squared: f64, c: f64) -> f64 {
    metric_contract(u, u) - mass_squared * c * c
}

/// Velocity data of a state in the 3+1 split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split3 {
    pub t: f64,
    pub r: Vec3,
    pub v: Vec3,
    pub qdot4: f64,
}

pub(crate) fn degenerate_qdot4(qdot: &FourVector) -> bool {
    let norm = qdot.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    qdot[3].abs() < 1e-12 * norm.max(1.0)
}

/// `t = q4 / c`, `v^l = c qdot^l / qdot^4`.
pub fn split_3d(q: &FourVector, qdot: &FourVector, c: f64) -> Result<Split3> {
    if degenerate_qdot4(qdot) {
        return Err(Error::DegenerateVelocity { qdot4: qdot[3] });
    }
    let k = c / qdot[3];
    Ok(Split3 {
        t: q[3] / c,
        r: q.spatial(),
        v: [k * qdot[0], k * qdot[1], k * qdot[2]],
        qdot4: qdot[3],
    })
}

/// Inverse of [`split_3d`]: `q4 = c t`, `qdot^l = v^l qdot^4 / c`.
pub fn unsplit_3d(split: &Split3, c: f64) -> (FourVector, FourVector) {
    let k = split.qdot4 / c;
    (
        FourVector::from_parts(split.r, c * split.t),
        FourVector::from_parts(
            [k * split.v[0], k * split.v[1], k * split.v[2]],
            split.qdot4,
        ),
    )
}

/// Small helpers on `[f64; 3]`.
pub mod vec3 {
    use super::Vec3;

    pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn norm2(a: &Vec3) -> f64 {
        dot(a, a)
    }

    pub fn norm(a: &Vec3) -> f64 {
        norm2(a).sqrt()
    }

    pub fn scale(k: f64, a: &Vec3) -> Vec3 {
        [k * a[0], k * a[1], k * a[2]]
    }

    pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }
}
