//! Reference scenarios in natural units, shared by tests, benchmarks and
//! the command-line examples.

use crate::chetaev::{normal_form, Model, ParticleSpec, State3, State4};
use crate::expr::{parse, Env, Expr};
use crate::fields::FieldSet;
use crate::minkowski::{vec3, FourVector, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub model: Model,
    pub position: FourVector,
    pub qdot: Vec3,
}

impl Scenario {
    fn new(name: &'static str, fields: FieldSet, particle: ParticleSpec, qdot: Vec3) -> Self {
        Scenario {
            name,
            model: Model::new(fields, particle),
            position: FourVector::ZERO,
            qdot,
        }
    }

    pub fn initial_4d(&self) -> State4 {
        State4 {
            s: 0.0,
            q: self.position,
            qdot: self.qdot,
        }
    }

    /// Same initial point seen by a three-dimensional observer.
    pub fn initial_3d(&self) -> State3 {
        let c = self.model.c();
        let m2 = self
            .model
            .sample(&self.position)
            .expect("scenario fields evaluate at the start")
            .mass_squared;
        let h = normal_form(m2, &self.qdot, c).expect("scenario starts inside the domain");
        State3 {
            t: self.position[3] / c,
            r: self.position.spatial(),
            v: vec3::scale(c / h, &self.qdot),
        }
    }
}

fn expr(src: &str, env: &Env) -> Expr {
    parse(src, env).expect("scenario expressions are valid")
}

fn fields(phi: [&str; 4], psi: &str) -> FieldSet {
    let env = Env::default();
    let mut f = FieldSet::zero(env.clone()).with_psi(expr(psi, &env));
    for (i, src) in phi.iter().enumerate() {
        f = f.with_phi(i, expr(src, &env));
    }
    f
}

const NONE: [&str; 4] = ["0"; 4];

pub fn free_massive() -> Scenario {
    Scenario::new("free massive", fields(NONE, "0"), ParticleSpec::massive(1.0, 1.0), [0.5, 0.2, 0.0])
}

/// Unit charge and mass in a unit magnetic field along `z`; the orbit closes
/// after `s = 2 pi`.
pub fn cyclotron() -> Scenario {
    Scenario::new(
        "uniform-B cyclotron",
        fields(["-0.5*q2", "0.5*q1", "0", "0"], "0"),
        ParticleSpec::massive(1.0, 1.0),
        [0.5, 0.0, 0.0],
    )
}

pub fn linear_psi_massive() -> Scenario {
    Scenario::new(
        "linear-psi massive",
        fields(NONE, "0.1*q1"),
        ParticleSpec::massive(1.0, 1.0),
        [0.0, 0.0, 0.0],
    )
}

pub fn free_tachyon() -> Scenario {
    Scenario::new("free tachyon", fields(NONE, "0"), ParticleSpec::tachyon(1.0, 1.0), [1.5, 0.5, 0.0])
}

/// Moves against the gradient, which keeps it away from the light barrier.
pub fn linear_psi_tachyon() -> Scenario {
    Scenario::new(
        "linear-psi tachyon",
        fields(NONE, "0.1*q1"),
        ParticleSpec::tachyon(1.0, 1.0),
        [-2.0, 0.3, 0.0],
    )
}

/// The five scenarios with `M != 0`.
pub fn corpus() -> Vec<Scenario> {
    vec![
        free_massive(),
        cyclotron(),
        linear_psi_massive(),
        free_tachyon(),
        linear_psi_tachyon(),
    ]
}
