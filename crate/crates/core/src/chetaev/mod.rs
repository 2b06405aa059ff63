//! Equations of motion of a particle constrained by `g(u, u) = M c^2`.
//!
//! The Lagrangian `L = -g(u, u)/2 + phi(u) - psi` is the same for every
//! particle; the regime is fixed by the sign of the mass function `M`.
//! Everything here is evaluated on the branch `qdot4 > 0`.

mod energy;
mod forces;
mod massless;
mod reduced;

use serde::Serialize;

pub use energy::{energy_mass_relations, EnergyMass, Kinematics};
pub use forces::{
    dicke_transform, induced_constraint_force, rhs_3d, rhs_3d_dicke, DickeTerms, ForceBreakdown,
    Rhs3,
};
pub use massless::{fields_compatibility, massless_force, massless_rhs, Compatibility};
pub use reduced::{
    bbar_inverse_closed, chetaev_full_rhs, chetaev_multiplier, normal_form, normal_form_jet, reduced_coeffs_closed,
    reduced_coeffs_dual, reduced_coeffs_generic, rhs_4d, unconstrained_ab, Mat3, NormalFormJet,
    ReducedCoeffs, UnconstrainedAb,
};

use crate::error::Result;
use crate::expr::{eval, Expr};
use crate::fields::{FieldSample, FieldSet};
use crate::minkowski::{FourVector, Vec3};

/// Light-barrier guard on `|1 - v^2/c^2|`.
pub const SPEED_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// `M = m0^2`.
    Massive { m0: f64 },
    /// `M = -m0^2`.
    Tachyon { m0: f64 },
    /// `M = 0`.
    Massless,
    /// `M` given by the field set's mass expression.
    General,
}

impl Regime {
    pub fn constant_mass_squared(&self) -> Option<f64> {
        match *self {
            Regime::Massive { m0 } => Some(m0 * m0),
            Regime::Tachyon { m0 } => Some(-m0 * m0),
            Regime::Massless => Some(0.0),
            Regime::General => None,
        }
    }

    pub fn rest_mass(&self) -> Option<f64> {
        match *self {
            Regime::Massive { m0 } | Regime::Tachyon { m0 } => Some(m0),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Massive { .. } => "massive",
            Regime::Tachyon { .. } => "tachyon",
            Regime::Massless => "massless",
            Regime::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    pub regime: Regime,
    /// Electric charge `e`; only used to reconstruct `A` and `V` from `phi`.
    pub charge: f64,
    /// Scalar charge `a`: the equations see `a * psi`.
    pub scalar_charge: f64,
    /// Kinetic energy for the massless regime.
    pub energy: Expr,
}

impl ParticleSpec {
    pub fn massive(m0: f64, charge: f64) -> Self {
        assert!(m0 > 0.0, "rest mass must be positive");
        ParticleSpec {
            regime: Regime::Massive { m0 },
            charge,
            scalar_charge: 1.0,
            energy: Expr::Num(1.0),
        }
    }

    pub fn tachyon(m0: f64, charge: f64) -> Self {
        assert!(m0 > 0.0, "rest mass must be positive");
        ParticleSpec {
            regime: Regime::Tachyon { m0 },
            charge,
            scalar_charge: 1.0,
            energy: Expr::Num(1.0),
        }
    }

    /// Massless particles do not couple to `psi` unless a scalar charge is forced.
    pub fn massless(charge: f64, energy: Expr) -> Self {
        ParticleSpec {
            regime: Regime::Massless,
            charge,
            scalar_charge: 0.0,
            energy,
        }
    }

    pub fn general(charge: f64) -> Self {
        ParticleSpec {
            regime: Regime::General,
            charge,
            scalar_charge: 1.0,
            energy: Expr::Num(1.0),
        }
    }

    pub fn with_scalar_charge(mut self, a: f64) -> Self {
        self.scalar_charge = a;
        self
    }

    /// `psi = m0 * psi_bar`: the scalar charge equals the rest mass.
    pub fn with_rest_mass_scalar_charge(mut self) -> Self {
        self.scalar_charge = self.regime.rest_mass().unwrap_or(0.0);
        self
    }
}

/// A particle in a set of external fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub fields: FieldSet,
    pub particle: ParticleSpec,
}

impl Model {
    /// Constant-mass regimes override the field set's mass expression.
    pub fn new(mut fields: FieldSet, particle: ParticleSpec) -> Self {
        if let Some(m2) = particle.regime.constant_mass_squared() {
            fields.mass_squared = Expr::Num(m2);
        }
        Model { fields, particle }
    }

    pub fn c(&self) -> f64 {
        self.fields.env.c
    }

    /// Field sample with `psi` scaled by the scalar charge.
    pub fn sample(&self, q: &FourVector) -> Result<FieldSample> {
        let mut s = self.fields.sample(q)?;
        let a = self.particle.scalar_charge;
        s.psi *= a;
        s.dpsi = s.dpsi.map(|d| a * d);
        Ok(s)
    }

    pub fn sample_3d(&self, t: f64, r: &Vec3) -> Result<FieldSample> {
        self.sample(&FourVector::from_parts(*r, self.c() * t))
    }

    /// Massless energy at a space-time point.
    pub fn energy_at(&self, q: &FourVector) -> Result<f64> {
        eval(&self.particle.energy, q, &self.fields.env).map_err(|source| {
            crate::error::Error::Field {
                field: "energy",
                source,
            }
        })
    }
}

/// Point of the evolution space in fibred coordinates; `qdot4` is implied
/// by the constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State4 {
    pub s: f64,
    pub q: FourVector,
    pub qdot: Vec3,
}

/// Point of the evolution space as seen by a three-dimensional observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State3 {
    pub t: f64,
    pub r: Vec3,
    pub v: Vec3,
}

impl State3 {
    pub fn q(&self, c: f64) -> FourVector {
        FourVector::from_parts(self.r, c * self.t)
    }
}
