//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Run with `cargo test --release --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nhrel_core::chetaev::{
    bbar_inverse_closed, energy_mass_relations, massless_rhs, reduced_coeffs_closed,
    reduced_coeffs_dual, Kinematics,
};
use nhrel_core::integrate::{integrate_3d, integrate_4d, integrate_massless, Form3, Output};
use nhrel_core::minkowski::vec3;
use nhrel_core::oracle::{chetaev_full_solve, coeffs_deviation, el_residual_3d, standard_lagrangian};
use nhrel_core::scenarios::{self, Scenario};
use nhrel_core::{parse, Env, Error, Expr, FieldSet, FourVector, Model, ParticleSpec, Settings, State3, State4, Vec3};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn tight() -> Settings {
    Settings::default().with_tolerances(1e-12, 1e-14)
}

fn fields(phi: [&str; 4], psi: &str) -> FieldSet {
    let env = Env::default();
    let mut f = FieldSet::zero(env.clone()).with_psi(parse(psi, &env).unwrap());
    for (i, src) in phi.iter().enumerate() {
        f = f.with_phi(i, parse(src, &env).unwrap());
    }
    f
}

fn max_rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn constraint_preservation() -> Check {
    let mut worst = (0.0f64, "");
    let mut slowest = Duration::ZERO;
    for sc in scenarios::corpus() {
        let start = Instant::now();
        let traj = integrate_4d(&sc.model, &sc.initial_4d(), 10.0, &Settings::default())
            .map_err(|e| format!("{}: {e}", sc.name))?;
        slowest = slowest.max(start.elapsed());
        let r = traj.diagnostics.max_constraint_residual;
        if r >= worst.0 {
            worst = (r, sc.name);
        }
    }
    let detail = format!(
        "max residual {:.2e} ({}), slowest run {:.3}s",
        worst.0,
        worst.1,
        slowest.as_secs_f64()
    );
    if worst.0 < 1e-8 && slowest < Duration::from_secs(5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = rng(2024);
    let (mut coeffs, mut inverse) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let model = any_model(&mut rng);
        let st = random_state4(&mut rng, &model);
        let closed = reduced_coeffs_closed(&model, &st).map_err(|e| e.to_string())?;
        let generic = reduced_coeffs_dual(&model, &st).map_err(|e| e.to_string())?;
        coeffs = coeffs.max(coeffs_deviation(&closed, &generic));
        let m2 = model.sample(&st.q).unwrap().mass_squared;
        let inv = bbar_inverse_closed(m2, &st.qdot, model.c()).map_err(|e| e.to_string())?;
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..3).map(|k| closed.bbar[i][k] * inv[k][j]).sum();
                inverse = inverse.max((p - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let detail = format!("500 states: coefficient deviation {coeffs:.2e}, |B B^-1 - I| {inverse:.2e}");
    if coeffs < 1e-6 && inverse < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn full_vs_reduced() -> Check {
    let settings = tight().with_output(Output::Grid(0.1));
    let mut worst = 0.0f64;
    for sc in scenarios::corpus() {
        let reduced = integrate_4d(&sc.model, &sc.initial_4d(), 5.0, &settings)
            .map_err(|e| format!("{}: {e}", sc.name))?;
        let full = chetaev_full_solve(&sc.model, &sc.initial_4d(), 5.0, &settings)
            .map_err(|e| format!("{}: {e}", sc.name))?;
        if reduced.samples.len() != full.samples.len() {
            return Err(format!("{}: sample grids differ", sc.name));
        }
        let c = sc.model.c();
        for (a, b) in reduced.samples.iter().zip(&full.samples) {
            worst = worst.max(max_rel_vec(&a.q(c).0, &b.q(c).0));
        }
    }
    let detail = format!("max relative deviation in q(s) {worst:.2e}");
    if worst < 1e-7 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn el_residual(psi: &str) -> Result<f64, String> {
    let sc = scenarios::cyclotron();
    let model = Model::new(fields(["-0.5*q2", "0.5*q1", "0", "0"], psi), sc.model.particle.clone());
    let settings = tight().with_output(Output::Grid(0.01));
    let traj = integrate_3d(&model, &sc.initial_3d(), 10.0, &settings, Form3::Psi).map_err(|e| e.to_string())?;
    let lagrangian = standard_lagrangian(&model, false).map_err(|e| e.to_string())?;
    let res = el_residual_3d(&lagrangian, &traj.samples).map_err(|e| e.to_string())?;
    Ok(res.iter().map(vec3::norm).fold(0.0, f64::max))
}

fn variationality() -> Check {
    let constant = el_residual("0.7")?;
    let linear = el_residual("0.3*q1")?;
    let detail = format!("psi constant: {constant:.2e} (< 1e-6), psi = 0.3 q1: {linear:.2e} (> 1e-2)");
    if constant < 1e-6 && linear > 1e-2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dicke_equivalence() -> Check {
    let settings = tight().with_output(Output::Grid(0.1));
    let mut details = Vec::new();
    let mut ok = true;
    for sc in [scenarios::linear_psi_massive(), scenarios::linear_psi_tachyon()] {
        let run = |form| integrate_3d(&sc.model, &sc.initial_3d(), 5.0, &settings, form);
        let psi = run(Form3::Psi).map_err(|e| format!("{}: {e}", sc.name))?;
        let dicke = run(Form3::Dicke).map_err(|e| format!("{}: {e}", sc.name))?;
        let mut worst = 0.0f64;
        for (a, b) in psi.samples.iter().zip(&dicke.samples) {
            worst = worst.max(max_rel_vec(&a.r, &b.r)).max(max_rel_vec(&a.v, &b.v));
        }
        ok &= worst < 1e-7 && psi.samples.len() == dicke.samples.len();
        details.push(format!("{} {worst:.2e}", sc.name));
    }
    let detail = format!("max relative deviation: {}", details.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tachyon_landmark() -> Check {
    let m0 = 1.7;
    let c = 1.0;
    let model = Model::new(fields(["0"; 4], "0"), ParticleSpec::tachyon(m0, 1.0));
    let start = State3 {
        t: 0.0,
        r: [0.0; 3],
        v: [c * 2f64.sqrt(), 0.0, 0.0],
    };
    let observer = integrate_3d(&model, &start, 10.0, &Settings::default(), Form3::Psi).map_err(|e| e.to_string())?;
    // the same particle in s: |qdot| = sqrt(2) m0 c gives v = c sqrt(2)
    let st = State4 {
        s: 0.0,
        q: FourVector::ZERO,
        qdot: [0.0, 2f64.sqrt() * m0 * c, 0.0],
    };
    let proper = integrate_4d(&model, &st, 10.0, &Settings::default()).map_err(|e| e.to_string())?;
    let relation = energy_mass_relations(&model.particle, Kinematics::Speed(c * 2f64.sqrt()), c)
        .map_err(|e| e.to_string())?;
    let worst = observer
        .samples
        .iter()
        .chain(&proper.samples)
        .map(|s| (s.mass - m0).abs())
        .fold((relation.mass - m0).abs(), f64::max);
    let detail = format!(
        "{} samples, max |m - m0| {worst:.2e}",
        observer.samples.len() + proper.samples.len()
    );
    if worst < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn massless(phi: [&str; 4], psi: &str, energy: &str, scalar_charge: f64) -> Model {
    let env = Env::default();
    let particle = ParticleSpec::massless(1.0, parse(energy, &env).unwrap()).with_scalar_charge(scalar_charge);
    Model::new(fields(phi, psi), particle)
}

fn turning_angle(energy: &str, horizon: f64) -> Result<f64, String> {
    let model = massless(["-0.5*q2", "0.5*q1", "0", "0"], "0", energy, 0.0);
    let traj = integrate_massless(&model, 0.0, &[0.0; 3], &[1.0, 0.0, 0.0], horizon, &tight())
        .map_err(|e| e.to_string())?;
    let e = traj.last().unwrap().v;
    Ok(e[1].atan2(e[0]).abs())
}

fn massless_suite() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;

    // straight lines without fields
    let e0: Vec3 = [0.6, 0.0, 0.8];
    let free = massless(["0"; 4], "0", "2", 0.0);
    let traj = integrate_massless(&free, 0.0, &[0.0; 3], &e0, 10.0, &Settings::default()).map_err(|e| e.to_string())?;
    let drift = traj
        .samples
        .iter()
        .map(|s| (0..3).map(|j| (s.v[j] - e0[j]).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    ok &= drift < 1e-12;
    parts.push(format!("(a) |de| {drift:.1e}"));

    // transversality in crossed fields
    let crossed = massless(["-0.5*q2 + 0.1*q4", "0.5*q1", "0.2*q1*q2", "0.3*q3"], "0", "1 + 0.1*q1^2", 0.0);
    let traj = integrate_massless(&crossed, 0.0, &[0.1, 0.2, 0.0], &[0.0, 0.6, 0.8], 10.0, &Settings::default())
        .map_err(|e| e.to_string())?;
    let transverse = traj.diagnostics.max_transverse_residual.unwrap_or(f64::INFINITY);
    ok &= transverse < 1e-14;
    parts.push(format!("(b) |F.e| {transverse:.1e}"));

    // E = c p, on the relations and along the trajectory
    let mut identity = 0.0f64;
    for c in [0.5, 1.0, 3.0] {
        for p in [1e-3, 0.7, 12.0] {
            let r = energy_mass_relations(&ParticleSpec::massless(1.0, Expr::Num(1.0)), Kinematics::Momentum(p), c)
                .map_err(|e| e.to_string())?;
            identity = identity.max((r.energy - c * p).abs() / (c * p));
        }
    }
    for s in &traj.samples {
        // |p| = m c for a massless particle
        identity = identity.max((s.energy - s.mass * traj.c * traj.c).abs() / s.energy);
    }
    ok &= identity < 1e-12;
    parts.push(format!("(c) |E - cp| {identity:.1e}"));

    // doubling E halves the turning rate, pointwise and along the orbit
    let field = massless(["-0.5*q2", "0.5*q1", "0", "0"], "0", "1", 0.0);
    let (r, e) = ([0.3, -0.2, 0.1], [0.0, 0.6, 0.8]);
    let w1 = vec3::norm(&massless_rhs(&field, 0.0, &r, &e, 1.5).map_err(|e| e.to_string())?);
    let w2 = vec3::norm(&massless_rhs(&field, 0.0, &r, &e, 3.0).map_err(|e| e.to_string())?);
    let pointwise = (w2 / w1 - 0.5).abs();
    let orbit = (turning_angle("2", 1.0)? / turning_angle("1", 1.0)? - 0.5).abs();
    ok &= pointwise < 1e-9 && orbit < 1e-9;
    parts.push(format!("(d) ratio error {:.1e}", pointwise.max(orbit)));

    // a nonconstant psi felt by the particle is incompatible with M = 0
    let coupled = massless(["0"; 4], "0.1*q1", "1", 1.0);
    let outcome = integrate_massless(&coupled, 0.0, &[0.0; 3], &[1.0, 0.0, 0.0], 1.0, &Settings::default());
    let rejected = matches!(outcome.as_ref().map_err(|a| a.error.root()), Err(Error::IncompatibleFields { .. }));
    ok &= rejected;
    parts.push(format!("(e) {}", if rejected { "IncompatibleFields" } else { "not rejected" }));

    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn parametrization(sc: &Scenario) -> Check {
    let c = sc.model.c();
    let proper = integrate_4d(&sc.model, &sc.initial_4d(), 5.0, &tight().with_output(Output::Grid(0.5)))
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for sample in proper.samples.iter().skip(1) {
        let observer = integrate_3d(&sc.model, &sc.initial_3d(), sample.t, &tight(), Form3::Psi)
            .map_err(|e| e.to_string())?;
        let end = observer.last().unwrap();
        worst = worst
            .max(max_rel_vec(&sample.q(c).0, &end.q(c).0))
            .max(max_rel_vec(&sample.v, &end.v))
            .max(max_rel_vec(&[sample.s], &[end.s]));
    }
    let grid = integrate_3d(&sc.model, &sc.initial_3d(), 5.0, &tight().with_output(Output::Grid(0.01)), Form3::Psi)
        .map_err(|e| e.to_string())?;
    let meq = grid.diagnostics.max_mass_equation_residual.unwrap_or(f64::INFINITY);
    let detail = format!("{}: max relative deviation {worst:.2e}, |ds/dt m - 1| {meq:.2e}", sc.name);
    if worst < 1e-7 && meq < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn parametrization_consistency() -> Check {
    let mut sc = scenarios::linear_psi_massive();
    sc.qdot = [0.4, -0.3, 0.2];
    parametrization(&sc)
}

fn convergence() -> Check {
    let start = Instant::now();
    let sc = scenarios::cyclotron();
    let horizon: f64 = 6.4;
    let h = 1.25f64.sqrt();
    // omega = 1 in s, radius 0.5
    let exact = [0.5 * horizon.sin(), 0.5 * (horizon.cos() - 1.0), 0.0, h * horizon];
    let mut errors = Vec::new();
    for step in [0.4, 0.2, 0.1, 0.05] {
        let settings = Settings::default().with_fixed_step(step);
        let traj = integrate_4d(&sc.model, &sc.initial_4d(), horizon, &settings).map_err(|e| e.to_string())?;
        let q = traj.last().unwrap().q(sc.model.c());
        let err = (0..4).map(|k| (q[k] - exact[k]).abs()).fold(0.0, f64::max);
        errors.push(err);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let least = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    let detail = format!(
        "orders {:?}, {:.3}s",
        orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>(),
        elapsed.as_secs_f64()
    );
    if least >= 4.0 && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    // libtest arguments are accepted and ignored
    let criteria: [Criterion; 9] = [
        ("constraint preservation", constraint_preservation),
        ("oracle equivalence", oracle_equivalence),
        ("full Chetaev system vs reduced", full_vs_reduced),
        ("variationality", variationality),
        ("rest-mass form equivalence", dicke_equivalence),
        ("tachyon at c sqrt(2)", tachyon_landmark),
        ("massless suite", massless_suite),
        ("parametrization consistency", parametrization_consistency),
        ("convergence order", convergence),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
