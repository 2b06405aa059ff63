//! Time-marching of the three regimes.

mod rk;

use serde::Serialize;

pub use rk::{solve, Output, Settings, Stats};

use crate::chetaev::{
    self, fields_compatibility, massless_force, rhs_3d, rhs_3d_dicke, rhs_4d, unconstrained_ab,
    ForceBreakdown, Model, State3, State4,
};
use crate::error::{Error, Result};
use crate::minkowski::{vec3, FourVector, Vec3};

/// One recorded point, already split for a three-dimensional observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub s: f64,
    pub t: f64,
    pub r: Vec3,
    /// Velocity; `c e_v` for massless particles.
    pub v: Vec3,
    pub qdot4: f64,
    pub mass: f64,
    pub energy: f64,
    /// `|g(u, u) - M c^2| / (1 + |M| c^2)` of the independently propagated
    /// velocity, or the direction-norm error for massless runs.
    pub constraint_residual: f64,
    pub forces: ForceBreakdown,
}

impl Sample {
    pub fn q(&self, c: f64) -> FourVector {
        FourVector::from_parts(self.r, c * self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub max_constraint_residual: f64,
    /// Largest `|ds/dt m - 1|` from differencing the recorded `s(t)`.
    pub max_mass_equation_residual: Option<f64>,
    /// Largest `|F . e_v|` over accepted massless steps.
    pub max_transverse_residual: Option<f64>,
    /// Largest `| |e_v| - 1 |` before renormalization.
    pub max_direction_drift: Option<f64>,
    pub max_compatibility: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub regime: &'static str,
    pub c: f64,
    pub settings: Settings,
    pub samples: Vec<Sample>,
    pub stats: Stats,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    fn new(model: &Model, settings: &Settings) -> Self {
        Trajectory {
            regime: model.particle.regime.name(),
            c: model.c(),
            settings: *settings,
            samples: Vec::new(),
            stats: Stats::default(),
            diagnostics: Diagnostics::default(),
        }
    }

    fn push(&mut self, sample: Sample) {
        let d = &mut self.diagnostics;
        d.max_constraint_residual = d.max_constraint_residual.max(sample.constraint_residual);
        self.samples.push(sample);
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Aborted {
    pub error: Error,
    pub partial: Trajectory,
}

impl From<Aborted> for Error {
    fn from(a: Aborted) -> Error {
        a.error
    }
}

impl std::fmt::Display for Aborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Aborted {}

pub type RunResult = std::result::Result<Trajectory, Box<Aborted>>;

fn finish(mut traj: Trajectory, outcome: Result<Stats>) -> RunResult {
    match outcome {
        Ok(stats) => {
            traj.stats = stats;
            Ok(traj)
        }
        Err(error) => Err(Box::new(Aborted {
            error,
            partial: traj,
        })),
    }
}

fn scaled_residual(m2: f64, qdot: &Vec3, qdot4: f64, c: f64) -> f64 {
    (qdot4 * qdot4 - vec3::norm2(qdot) - m2 * c * c).abs() / (1.0 + m2.abs() * c * c)
}

/// Reduced equations in `s`. State: `q`, `qdot^1..3`, and a shadow `qdot4`
/// evolved by `qddot^4 = lambda - A_4` to measure drift from the constraint.
pub fn integrate_4d(model: &Model, initial: &State4, horizon: f64, settings: &Settings) -> RunResult {
    let c = model.c();
    let mut traj = Trajectory::new(model, settings);
    let h0 = match model.sample(&initial.q).and_then(|s| {
        if s.mass_squared == 0.0 {
            Err(Error::MasslessRegime)
        } else {
            chetaev::normal_form(s.mass_squared, &initial.qdot, c)
        }
    }) {
        Ok(h) => h,
        Err(error) => return Err(Box::new(Aborted { error, partial: traj })),
    };
    let pack = |q: &FourVector, qd: &Vec3, shadow: f64| -> [f64; 8] {
        [q[0], q[1], q[2], q[3], qd[0], qd[1], qd[2], shadow]
    };
    let unpack = |s: f64, y: &[f64; 8]| State4 {
        s,
        q: FourVector([y[0], y[1], y[2], y[3]]),
        qdot: [y[4], y[5], y[6]],
    };
    let rhs = |s: f64, y: &[f64; 8]| -> Result<[f64; 8]> {
        let st = unpack(s, y);
        let acc = rhs_4d(model, &st)?;
        let sample = model.sample(&st.q)?;
        let h = chetaev::normal_form(sample.mass_squared, &st.qdot, c)?;
        let full = FourVector::from_parts(st.qdot, h);
        let a4 = unconstrained_ab(&sample, &full).a[3];
        let lambda = chetaev::chetaev_multiplier(model, &st)?;
        Ok([
            st.qdot[0], st.qdot[1], st.qdot[2], h, acc[0], acc[1], acc[2], lambda - a4,
        ])
    };
    let outcome = solve(
        rhs,
        initial.s,
        pack(&initial.q, &initial.qdot, h0),
        horizon,
        settings,
        |s, y, output| {
            if !output {
                return Ok(());
            }
            let st = unpack(s, y);
            let m2 = model.sample(&st.q)?.mass_squared;
            let h = chetaev::normal_form(m2, &st.qdot, c)?;
            let v = vec3::scale(c / h, &st.qdot);
            let s3 = State3 {
                t: st.q[3] / c,
                r: st.q.spatial(),
                v,
            };
            traj.push(Sample {
                s,
                t: s3.t,
                r: s3.r,
                v,
                qdot4: h,
                mass: h / c,
                energy: c * h,
                constraint_residual: scaled_residual(m2, &st.qdot, y[7], c),
                forces: rhs_3d(model, &s3)?.forces,
            });
            Ok(())
        },
    );
    finish(traj, outcome)
}

/// Which three-dimensional form of the equations to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form3 {
    /// Lorentz, induced constraint and scalar-gradient forces.
    Psi,
    /// Effective rest mass with the Dicke force.
    Dicke,
}

/// Equations in observer time `t`, co-integrating `ds/dt = 1/m`.
pub fn integrate_3d(
    model: &Model,
    initial: &State3,
    horizon: f64,
    settings: &Settings,
    form: Form3,
) -> RunResult {
    let c = model.c();
    let mut traj = Trajectory::new(model, settings);
    let unpack = |t: f64, y: &[f64; 7]| State3 {
        t,
        r: [y[0], y[1], y[2]],
        v: [y[3], y[4], y[5]],
    };
    let eval = |st: &State3| match form {
        Form3::Psi => rhs_3d(model, st),
        Form3::Dicke => rhs_3d_dicke(model, st),
    };
    let rhs = |t: f64, y: &[f64; 7]| -> Result<[f64; 7]> {
        let st = unpack(t, y);
        let r = eval(&st)?;
        let a = r.accel;
        Ok([st.v[0], st.v[1], st.v[2], a[0], a[1], a[2], 1.0 / r.mass])
    };
    let r0 = initial.r;
    let v0 = initial.v;
    let outcome = solve(
        rhs,
        initial.t,
        [r0[0], r0[1], r0[2], v0[0], v0[1], v0[2], 0.0],
        horizon,
        settings,
        |t, y, output| {
            if !output {
                return Ok(());
            }
            let st = unpack(t, y);
            let r = eval(&st)?;
            let forces = match form {
                Form3::Psi => r.forces,
                Form3::Dicke => rhs_3d(model, &st)?.forces,
            };
            traj.push(Sample {
                s: y[6],
                t,
                r: st.r,
                v: st.v,
                qdot4: r.mass * c,
                mass: r.mass,
                energy: r.mass * c * c,
                constraint_residual: 0.0,
                forces,
            });
            Ok(())
        },
    );
    traj.diagnostics.max_mass_equation_residual = mass_equation_residual(&traj.samples);
    finish(traj, outcome)
}

/// `|ds/dt m - 1|` with `ds/dt` from fourth-order differences of the
/// recorded `s(t)`; needs a uniform output grid.
fn mass_equation_residual(samples: &[Sample]) -> Option<f64> {
    if samples.len() < 5 {
        return None;
    }
    let dt = samples[1].t - samples[0].t;
    let uniform = samples
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - dt).abs() <= 1e-9 * dt.abs());
    if !uniform {
        return None;
    }
    let worst = samples
        .windows(5)
        .map(|w| {
            let ds = (w[0].s - 8.0 * w[1].s + 8.0 * w[3].s - w[4].s) / (12.0 * dt);
            (ds * w[2].mass - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Some(worst)
}

/// Light-like motion in `t`: `de/dt = (c/E) F`, `dr/dt = c e`, `ds/dt = c^2/E`.
/// The direction is renormalized after every accepted step; with a nonzero
/// scalar charge every step checks the fields compatibility condition.
pub fn integrate_massless(
    model: &Model,
    t0: f64,
    r0: &Vec3,
    e0: &Vec3,
    horizon: f64,
    settings: &Settings,
) -> RunResult {
    let c = model.c();
    let mut traj = Trajectory::new(model, settings);
    if !matches!(model.particle.regime, chetaev::Regime::Massless) {
        return Err(Box::new(Aborted {
            error: Error::NonConstantMass,
            partial: traj,
        }));
    }
    let check_scalar = model.particle.scalar_charge != 0.0;
    let energy_at = |t: f64, r: &Vec3| -> Result<f64> {
        let e = model.energy_at(&FourVector::from_parts(*r, c * t))?;
        if !(e > 0.0) {
            return Err(Error::NonPositiveEnergy { energy: e });
        }
        Ok(e)
    };
    let rhs = |t: f64, y: &[f64; 7]| -> Result<[f64; 7]> {
        let r = [y[0], y[1], y[2]];
        let e = [y[3], y[4], y[5]];
        let energy = energy_at(t, &r)?;
        let sample = model.sample(&FourVector::from_parts(r, c * t))?;
        let f = massless_force(&sample, &e, c);
        let k = c / energy;
        Ok([c * e[0], c * e[1], c * e[2], k * f[0], k * f[1], k * f[2], c * c / energy])
    };
    let mut max_transverse = 0.0f64;
    let mut max_drift = 0.0f64;
    let mut max_compat = (0.0f64, 0.0f64);
    let outcome = solve(
        rhs,
        t0,
        [r0[0], r0[1], r0[2], e0[0], e0[1], e0[2], 0.0],
        horizon,
        settings,
        |t, y, output| {
            let r = [y[0], y[1], y[2]];
            let norm = vec3::norm(&[y[3], y[4], y[5]]);
            max_drift = max_drift.max((norm - 1.0).abs());
            for x in &mut y[3..6] {
                *x /= norm;
            }
            let e = [y[3], y[4], y[5]];
            let sample = model.sample(&FourVector::from_parts(r, c * t))?;
            let f = massless_force(&sample, &e, c);
            max_transverse = max_transverse.max(vec3::dot(&f, &e).abs());
            if check_scalar {
                let compat = fields_compatibility(model, t, &r, &e)?;
                let tol = 1e-6 * compat.scale.max(1.0);
                max_compat = (max_compat.0.max(compat.force), max_compat.1.max(compat.dpsi_dt));
                if compat.force > tol || compat.dpsi_dt > tol {
                    return Err(Error::IncompatibleFields {
                        force_residual: compat.force,
                        dpsi_dt_residual: compat.dpsi_dt,
                    });
                }
            }
            if !output {
                return Ok(());
            }
            let energy = energy_at(t, &r)?;
            traj.push(Sample {
                s: y[6],
                t,
                r,
                v: vec3::scale(c, &e),
                qdot4: energy / c,
                mass: energy / (c * c),
                energy,
                constraint_residual: (norm - 1.0).abs(),
                forces: ForceBreakdown {
                    lorentz: f,
                    ..Default::default()
                },
            });
            Ok(())
        },
    );
    traj.diagnostics.max_transverse_residual = Some(max_transverse);
    traj.diagnostics.max_direction_drift = Some(max_drift);
    if check_scalar {
        traj.diagnostics.max_compatibility = Some(max_compat);
    }
    finish(traj, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chetaev::ParticleSpec;
    use crate::expr::{parse, Env, Expr};
    use crate::fields::FieldSet;

    fn model(env: Env, phi: [&str; 4], psi: &str, particle: ParticleSpec) -> Model {
        let mut f = FieldSet::zero(env.clone()).with_psi(parse(psi, &env).unwrap());
        for (i, src) in phi.iter().enumerate() {
            f = f.with_phi(i, parse(src, &env).unwrap());
        }
        Model::new(f, particle)
    }

    #[test]
    fn free_massive_4d_is_linear() {
        let m = model(Env::default(), ["0"; 4], "0", ParticleSpec::massive(1.0, 1.0));
        let init = State4 {
            s: 0.0,
            q: FourVector::ZERO,
            qdot: [0.6, 0.0, 0.0],
        };
        let traj = integrate_4d(&m, &init, 4.0, &Settings::default()).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(last.s, 4.0);
        assert!((last.r[0] - 2.4).abs() < 1e-12);
        assert!(traj.diagnostics.max_constraint_residual < 1e-12);
    }

    #[test]
    fn free_tachyon_3d_keeps_mass() {
        let m = model(Env::default(), ["0"; 4], "0", ParticleSpec::tachyon(1.3, 1.0));
        let init = State3 {
            t: 0.0,
            r: [0.0; 3],
            v: [2f64.sqrt(), 0.0, 0.0],
        };
        let traj = integrate_3d(&m, &init, 3.0, &Settings::default(), Form3::Psi).unwrap();
        for s in &traj.samples {
            assert!((s.mass - 1.3).abs() < 1e-10);
            assert!((s.s - s.t / 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn massive_approaching_light_barrier_aborts() {
        // strong uniform E field pushes v toward c; guard must stop the run
        let m = model(Env::default(), ["0", "0", "0", "1e3*q1"], "0", ParticleSpec::massive(1.0, 1.0));
        let init = State3 {
            t: 0.0,
            r: [0.0; 3],
            v: [1.0 - 1e-8, 0.0, 0.0],
        };
        let settings = Settings::default().with_tolerances(1e-6, 1e-9);
        let err = integrate_3d(&m, &init, 1e3, &settings, Form3::Psi).unwrap_err();
        assert!(
            matches!(err.error.root(), Error::SpeedSingularity { .. } | Error::StepSizeUnderflow { .. }),
            "{:?}",
            err.error
        );
        assert!(!err.partial.samples.is_empty());
    }

    #[test]
    fn massless_straight_line() {
        let m = model(Env::default(), ["0"; 4], "0", ParticleSpec::massless(0.0, Expr::Num(2.0)));
        let e0 = [0.6, 0.0, 0.8];
        let traj = integrate_massless(&m, 0.0, &[0.0; 3], &e0, 10.0, &Settings::default()).unwrap();
        let last = traj.last().unwrap();
        assert!((last.r[0] - 6.0).abs() < 1e-12 && (last.r[2] - 8.0).abs() < 1e-12);
        assert!((last.s - 5.0).abs() < 1e-12);
    }

    #[test]
    fn massless_scalar_field_is_incompatible() {
        let p = ParticleSpec::massless(0.0, Expr::Num(1.0)).with_scalar_charge(1.0);
        let m = model(Env::default(), ["0"; 4], "0.3*q1", p);
        let err = integrate_massless(&m, 0.0, &[0.0; 3], &[1.0, 0.0, 0.0], 1.0, &Settings::default())
            .unwrap_err();
        assert!(matches!(err.error.root(), Error::IncompatibleFields { .. }));
    }
}
