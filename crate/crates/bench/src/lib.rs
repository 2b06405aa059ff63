//! Benchmark scenarios: a moderately nested field set and a state inside
//! its constraint domain.

use nhrel_core::chetaev::State4;
use nhrel_core::scenarios::Scenario;
use nhrel_core::{parse, Env, FieldSet, FourVector, Model, ParticleSpec};

/// Massive particle in a nonuniform electromagnetic and scalar field.
pub fn nonuniform() -> Scenario {
    let env = Env::default();
    let e = |s: &str| parse(s, &env).expect("benchmark expressions parse");
    let fields = FieldSet::zero(env.clone())
        .with_phi(0, e("-0.5*q2*(1 + 0.1*sin(q3))"))
        .with_phi(1, e("0.5*q1*exp(-0.05*q3^2)"))
        .with_phi(2, e("0.1*cos(q1 + q2)"))
        .with_phi(3, e("-0.2*q1 + 0.05*tanh(q4)"))
        .with_psi(e("0.1*sqrt(1 + q1^2 + q2^2)"));
    Scenario {
        name: "nonuniform massive",
        model: Model::new(fields, ParticleSpec::massive(1.0, 1.0)),
        position: FourVector::new([0.3, -0.2, 0.1, 0.0]),
        qdot: [0.4, 0.1, -0.2],
    }
}

pub fn state(sc: &Scenario) -> State4 {
    sc.initial_4d()
}
