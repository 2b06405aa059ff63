//! Mass and kinetic energy on the evolution space.

use serde::Serialize;

use super::{ParticleSpec, Regime};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinematics {
    /// Magnitude of the three-momentum.
    Momentum(f64),
    /// Speed; undefined for massless particles.
    Speed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyMass {
    /// `m = E / c^2`.
    pub mass: f64,
    pub energy: f64,
    /// `qdot4 = m c = E / c`.
    pub qdot4: f64,
}

fn from_energy(energy: f64, c: f64) -> EnergyMass {
    EnergyMass {
        mass: energy / (c * c),
        energy,
        qdot4: energy / c,
    }
}

/// `E = c sqrt(m0^2 c^2 + p^2)`, `c sqrt(p^2 - m0^2 c^2)` or `c p` by regime.
pub fn energy_mass_relations(spec: &ParticleSpec, kin: Kinematics, c: f64) -> Result<EnergyMass> {
    let sigma = match spec.regime {
        Regime::Massive { .. } => 1.0,
        Regime::Tachyon { .. } => -1.0,
        Regime::Massless => 0.0,
        Regime::General => return Err(Error::NonConstantMass),
    };
    let m0 = spec.regime.rest_mass().unwrap_or(0.0);
    match kin {
        Kinematics::Momentum(p) => {
            let p = p.abs();
            if sigma < 0.0 && p <= m0 * c {
                return Err(Error::TachyonMomentumTooSmall {
                    p,
                    threshold: m0 * c,
                });
            }
            Ok(from_energy(c * (sigma * m0 * m0 * c * c + p * p).sqrt(), c))
        }
        Kinematics::Speed(v) => {
            if sigma == 0.0 {
                return Err(Error::MasslessRegime);
            }
            let gap = sigma * (1.0 - v * v / (c * c));
            if !(gap > 0.0) {
                return Err(if sigma < 0.0 {
                    Error::TachyonBarrier { speed: v }
                } else {
                    Error::SpeedSingularity { gap: gap.abs() }
                });
            }
            Ok(from_energy(m0 / gap.sqrt() * c * c, c))
        }
    }
}
