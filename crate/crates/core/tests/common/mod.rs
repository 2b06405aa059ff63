#![allow(dead_code)]

use nhrel_core::chetaev::{normal_form, Model, ParticleSpec, State3, State4};
use nhrel_core::expr::{Expr, Func};
use nhrel_core::minkowski::vec3;
use nhrel_core::{Env, FieldSet, FourVector, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn num(x: f64) -> Expr {
    Expr::Num(x)
}

/// Random smooth expression, defined and differentiable on all of R^4.
pub fn random_expr(rng: &mut TestRng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.7) {
            Expr::var(rng.gen_range(0..4))
        } else {
            num((rng.gen_range(-1.0..1.0f64) * 100.0).round() / 100.0)
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => Expr::add(a, random_expr(rng, depth - 1)),
        1 => Expr::sub(a, random_expr(rng, depth - 1)),
        2 | 3 => Expr::mul(a, random_expr(rng, depth - 1)),
        4 => Expr::div(a, Expr::add(num(2.0), Expr::call(Func::Cos, random_expr(rng, depth - 1)))),
        5 => Expr::pow(a, num(rng.gen_range(2..4) as f64)),
        6 => Expr::call(if rng.gen_bool(0.5) { Func::Sin } else { Func::Cos }, a),
        7 => Expr::call(Func::Tanh, a),
        8 => Expr::call(Func::Sqrt, Expr::add(num(1.0), Expr::pow(a, num(2.0)))),
        9 => Expr::call(Func::Log, Expr::add(num(2.0), Expr::call(Func::Sin, a))),
        _ => Expr::call(
            Func::Exp,
            Expr::mul(num(0.5), Expr::call(Func::Sin, a)),
        ),
    }
}

pub fn random_point(rng: &mut TestRng) -> FourVector {
    FourVector::new(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Massive,
    Tachyon,
    /// Position-dependent `M` of the given sign.
    General(f64),
}

pub fn random_kind(rng: &mut TestRng) -> Kind {
    match rng.gen_range(0..4) {
        0 => Kind::Massive,
        1 => Kind::Tachyon,
        2 => Kind::General(1.0),
        _ => Kind::General(-1.0),
    }
}

/// Random fields scaled to keep forces of order one.
pub fn random_model(rng: &mut TestRng, kind: Kind) -> Model {
    let c = rng.gen_range(0.5..2.0);
    let env = Env::new(c);
    let scaled = |rng: &mut TestRng| Expr::mul(num(rng.gen_range(-0.5..0.5)), random_expr(rng, 3));
    let mut fields = FieldSet::zero(env).with_psi(scaled(rng));
    for s in 0..4 {
        fields = fields.with_phi(s, scaled(rng));
    }
    let m0: f64 = rng.gen_range(0.6..1.5);
    let particle = match kind {
        Kind::Massive => ParticleSpec::massive(m0, 1.0),
        Kind::Tachyon => ParticleSpec::tachyon(m0, 1.0),
        Kind::General(sign) => {
            // sign * (m0^2 + 0.2 sin(...)) keeps the sign fixed
            let wobble = Expr::mul(num(0.2), Expr::call(Func::Sin, random_expr(rng, 2)));
            fields = fields.with_mass_squared(Expr::mul(num(sign), Expr::add(num(m0 * m0), wobble)));
            ParticleSpec::general(1.0)
        }
    };
    Model::new(fields, particle)
}

/// Largest `|M|` the model can reach (used to place tachyonic velocities).
fn mass_bound(model: &Model) -> f64 {
    match model.particle.regime {
        nhrel_core::Regime::Massive { m0 } | nhrel_core::Regime::Tachyon { m0 } => m0 * m0,
        _ => {
            // from the construction in random_model
            let v = model.fields.values(&FourVector::ZERO).unwrap().2.abs();
            v + 0.4
        }
    }
}

fn tachyonic(model: &Model) -> bool {
    model.sample(&FourVector::ZERO).unwrap().mass_squared < 0.0
}

/// Random velocity inside the constraint domain, away from the light barrier.
pub fn random_qdot(rng: &mut TestRng, model: &Model) -> Vec3 {
    let c = model.c();
    if tachyonic(model) {
        let dir: Vec3 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = vec3::norm(&dir).max(1e-3);
        let speed = rng.gen_range(1.3..2.5) * mass_bound(model).sqrt() * c;
        vec3::scale(speed / n, &dir)
    } else {
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
    }
}

pub fn random_state4(rng: &mut TestRng, model: &Model) -> State4 {
    State4 {
        s: 0.0,
        q: random_point(rng),
        qdot: random_qdot(rng, model),
    }
}

pub fn to_state3(model: &Model, st: &State4) -> State3 {
    let c = model.c();
    let m2 = model.sample(&st.q).unwrap().mass_squared;
    let h = normal_form(m2, &st.qdot, c).unwrap();
    State3 {
        t: st.q[3] / c,
        r: st.q.spatial(),
        v: vec3::scale(c / h, &st.qdot),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

pub fn any_model(rng: &mut TestRng) -> Model {
    let kind = random_kind(rng);
    random_model(rng, kind)
}
