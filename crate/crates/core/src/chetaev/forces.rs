//! Three-dimensional observer: forces and accelerations in observer time `t`.

use serde::Serialize;

use super::{Model, Regime, State3, SPEED_GUARD};
use crate::error::{Error, Result};
use crate::expr::Dual4;
use crate::fields::{lorentz_force, FieldSample};
use crate::minkowski::{vec3, Vec3};

/// Decomposition of `d/dt (m v)`.
///
/// `total()` is `lorentz + constraint_induced + scalar_gradient_term + dm_term`;
/// `constraint_induced + dm_term` is the induced constraint force.
/// `dicke` is the force of the equivalent rest-mass form at the same state
/// and is not part of the total.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ForceBreakdown {
    pub lorentz: Vec3,
    /// `-(k / M c^2) v dpsi/dt`.
    pub constraint_induced: Vec3,
    /// `-grad psi / k`.
    pub scalar_gradient_term: Vec3,
    pub dicke: Vec3,
    /// `(k / 2M) v dM/dt`.
    pub dm_term: Vec3,
}

impl ForceBreakdown {
    pub fn total(&self) -> Vec3 {
        std::array::from_fn(|j| {
            self.lorentz[j] + self.constraint_induced[j] + self.scalar_gradient_term[j] + self.dm_term[j]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rhs3 {
    /// `dv/dt`.
    pub accel: Vec3,
    /// Rate of the momentum-like quantity of the active form.
    pub momentum_rate: Vec3,
    pub forces: ForceBreakdown,
    /// `m = dt/ds = sqrt(M / (1 - v^2/c^2))`.
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DickeTerms {
    pub m0_tilde: f64,
    pub grad_m0_tilde: Vec3,
    /// `d m0_tilde / dt` along `v`.
    pub dm0_tilde_dt: f64,
    /// `m0_tilde / m0`, the factor on the Lorentz force.
    pub em_scale: f64,
    pub force: Vec3,
}

/// `1 - v^2/c^2`, checked against the light barrier and the regime's side of it.
fn speed_gap(model: &Model, mass_squared: f64, v: &Vec3) -> Result<f64> {
    let c = model.c();
    let speed = vec3::norm(v);
    let gap = 1.0 - speed * speed / (c * c);
    if gap.abs() < SPEED_GUARD {
        return Err(Error::SpeedSingularity { gap: gap.abs() });
    }
    if let Regime::Tachyon { .. } = model.particle.regime {
        if gap > 0.0 {
            return Err(Error::TachyonBarrier { speed });
        }
    }
    if mass_squared / gap <= 0.0 {
        return Err(Error::OutsideConstraintDomain {
            value: mass_squared / gap,
        });
    }
    Ok(gap)
}

/// `d/dt` along `(1, v)` of a field with partials in `q` (`q4 = c t`).
fn along(d: &[f64; 4], v: &Vec3, c: f64) -> f64 {
    c * d[3] + v[0] * d[0] + v[1] * d[1] + v[2] * d[2]
}

/// `a = (I - v v^T / c^2) x`.
fn project(v: &Vec3, x: &Vec3, c: f64) -> Vec3 {
    let k = vec3::dot(v, x) / (c * c);
    std::array::from_fn(|j| x[j] - k * v[j])
}

struct Local {
    sample: FieldSample,
    gap: f64,
    mass: f64,
    dpsi_dt: f64,
    dm_dt: f64,
}

fn local(model: &Model, state: &State3) -> Result<Local> {
    let c = model.c();
    let sample = model.sample(&state.q(c))?;
    let m2 = sample.mass_squared;
    if m2 == 0.0 {
        return Err(Error::MasslessRegime);
    }
    let gap = speed_gap(model, m2, &state.v)?;
    Ok(Local {
        gap,
        mass: (m2 / gap).sqrt(),
        dpsi_dt: along(&sample.dpsi, &state.v, c),
        dm_dt: along(&sample.dmass_squared, &state.v, c),
        sample,
    })
}

fn breakdown(model: &Model, state: &State3, l: &Local) -> ForceBreakdown {
    let c = model.c();
    let (k, m2, v) = (l.mass, l.sample.mass_squared, &state.v);
    ForceBreakdown {
        lorentz: lorentz_force(&l.sample, v, c),
        constraint_induced: vec3::scale(-k * l.dpsi_dt / (m2 * c * c), v),
        scalar_gradient_term: std::array::from_fn(|j| -l.sample.dpsi[j] / k),
        dicke: [0.0; 3],
        dm_term: vec3::scale(k * l.dm_dt / (2.0 * m2), v),
    }
}

/// `d/dt (k v) = F_L + F_C - grad psi / k` with `k = sqrt(M / (1 - v^2/c^2))`,
/// solved for `dv/dt`.
pub fn rhs_3d(model: &Model, state: &State3) -> Result<Rhs3> {
    let c = model.c();
    let l = local(model, state)?;
    let mut forces = breakdown(model, state, &l);
    if model.particle.regime.rest_mass().is_some() {
        forces.dicke = dicke_terms(model, state, &l.sample, l.gap)?.force;
    }
    let g = forces.total();
    let k = l.mass;
    let x: Vec3 = std::array::from_fn(|j| {
        (g[j] - state.v[j] * k * l.dm_dt / (2.0 * l.sample.mass_squared)) / k
    });
    Ok(Rhs3 {
        accel: project(&state.v, &x, c),
        momentum_rate: g,
        forces,
        mass: k,
    })
}

/// `F_C = -(v / (c^2 sqrt(M (1 - v^2/c^2)))) d/dt (psi - M c^2 / 2)`.
pub fn induced_constraint_force(model: &Model, state: &State3) -> Result<Vec3> {
    let l = local(model, state)?;
    let f = breakdown(model, state, &l);
    Ok(vec3::add(&f.constraint_induced, &f.dm_term))
}

fn dicke_terms(model: &Model, state: &State3, sample: &FieldSample, gap: f64) -> Result<DickeTerms> {
    let c = model.c();
    let (m0, sign) = match model.particle.regime {
        Regime::Massive { m0 } => (m0, 1.0),
        Regime::Tachyon { m0 } => (m0, -1.0),
        Regime::Massless => return Err(Error::MasslessRegime),
        Regime::General => return Err(Error::NonConstantMass),
    };
    let psi = Dual4 {
        value: sample.psi,
        partials: sample.dpsi,
    };
    let m0_tilde = (psi * (sign / (m0 * m0 * c * c))).exp() * m0;
    let grad: Vec3 = [m0_tilde.partials[0], m0_tilde.partials[1], m0_tilde.partials[2]];
    let root = (sign * gap).sqrt();
    Ok(DickeTerms {
        m0_tilde: m0_tilde.value,
        grad_m0_tilde: grad,
        dm0_tilde_dt: along(&m0_tilde.partials, &state.v, c),
        em_scale: m0_tilde.value / m0,
        force: vec3::scale(-sign * c * c * root, &grad),
    })
}

/// Effective rest mass `m0~ = m0 exp(+-psi / m0^2 c^2)` and the Dicke force
/// `F_D = -c^2 sqrt(1 - v^2/c^2) grad m0~` (massive) or
/// `+c^2 sqrt(v^2/c^2 - 1) grad m0~` (tachyon).
pub fn dicke_transform(model: &Model, state: &State3) -> Result<DickeTerms> {
    let c = model.c();
    match model.particle.regime {
        Regime::Massless => return Err(Error::MasslessRegime),
        Regime::General => return Err(Error::NonConstantMass),
        _ => {}
    }
    let sample = model.sample(&state.q(c))?;
    let gap = speed_gap(model, sample.mass_squared, &state.v)?;
    dicke_terms(model, state, &sample, gap)
}

/// Rest-mass form: `d/dt (m0~ w) = (m0~/m0) F_L + F_D` with
/// `w = v / sqrt(+-(1 - v^2/c^2))`, solved for `dv/dt`.
pub fn rhs_3d_dicke(model: &Model, state: &State3) -> Result<Rhs3> {
    let c = model.c();
    let l = local(model, state)?;
    let d = dicke_terms(model, state, &l.sample, l.gap)?;
    let sign = l.sample.mass_squared.signum();
    let root = (sign * l.gap).sqrt();
    let lorentz = lorentz_force(&l.sample, &state.v, c);
    let rate: Vec3 = std::array::from_fn(|j| d.em_scale * lorentz[j] + d.force[j]);
    let x: Vec3 = std::array::from_fn(|j| {
        (rate[j] - d.dm0_tilde_dt * state.v[j] / root) * root / d.m0_tilde
    });
    Ok(Rhs3 {
        accel: project(&state.v, &x, c),
        momentum_rate: rate,
        forces: ForceBreakdown {
            lorentz,
            dicke: d.force,
            ..Default::default()
        },
        mass: l.mass,
    })
}
