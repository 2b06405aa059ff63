//! Brute-force validators. Everything here works from plain evaluations of
//! the field expressions and the Lagrangian, with finite differences in place
//! of the analytic derivatives used by the equations of motion.
//!
//! Central differences use the step `1e-6 (1 + |x|)`; mixed second
//! derivatives use `1e-4 (1 + |x|)` in each direction.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;

use crate::chetaev::{
    chetaev_full_rhs, reduced_coeffs_closed, reduced_coeffs_generic, Model, NormalFormJet,
    ReducedCoeffs, Regime, State4, UnconstrainedAb,
};
use crate::error::{Error, Result};
use crate::integrate::{solve, Aborted, RunResult, Sample, Settings, Trajectory};
use crate::minkowski::{vec3, FourVector, Vec3};

const STEP: f64 = 1e-6;
const MIXED_STEP: f64 = 1e-4;

fn step(x: f64, base: f64) -> f64 {
    base * (1.0 + x.abs())
}

/// Central first derivative of `f` along coordinate `i` of `x`.
fn d1<const N: usize>(f: &impl Fn(&[f64; N]) -> Result<f64>, x: &[f64; N], i: usize) -> Result<f64> {
    let h = step(x[i], STEP);
    let (mut p, mut m) = (*x, *x);
    p[i] += h;
    m[i] -= h;
    Ok((f(&p)? - f(&m)?) / (2.0 * h))
}

/// Central second derivative `d^2 f / dx_i dx_j`.
fn d2<const N: usize>(
    f: &impl Fn(&[f64; N]) -> Result<f64>,
    x: &[f64; N],
    i: usize,
    j: usize,
) -> Result<f64> {
    let hi = step(x[i], MIXED_STEP);
    if i == j {
        let (mut p, mut m) = (*x, *x);
        p[i] += hi;
        m[i] -= hi;
        return Ok((f(&p)? - 2.0 * f(x)? + f(&m)?) / (hi * hi));
    }
    let hj = step(x[j], MIXED_STEP);
    let at = |si: f64, sj: f64| {
        let mut y = *x;
        y[i] += si * hi;
        y[j] += sj * hj;
        f(&y)
    };
    Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * hi * hj))
}

// ---------------------------------------------------------------------------
// Euler-Lagrange residual in observer time

/// `L(t, r, v)` for a three-dimensional observer.
pub trait Lagrangian3: Fn(f64, &Vec3, &Vec3) -> Result<f64> {}
impl<F: Fn(f64, &Vec3, &Vec3) -> Result<f64>> Lagrangian3 for F {}

/// `-m0 c^2 sqrt(1 - v^2/c^2) + (e/c) A.v - e V` (massive) or
/// `+m0 c^2 sqrt(v^2/c^2 - 1) + ...` (tachyon), read off `phi`:
/// `(e/c) A.v - e V = phi_l v^l + c phi_4`.
/// With `with_psi`, adds `-psi sqrt(|1 - v^2/c^2|) / m0`.
pub fn standard_lagrangian(model: &Model, with_psi: bool) -> Result<impl Lagrangian3 + '_> {
    let (m0, sign) = match model.particle.regime {
        Regime::Massive { m0 } => (m0, 1.0),
        Regime::Tachyon { m0 } => (m0, -1.0),
        Regime::Massless => return Err(Error::MasslessRegime),
        Regime::General => return Err(Error::NonConstantMass),
    };
    let c = model.c();
    let a = model.particle.scalar_charge;
    Ok(move |t: f64, r: &Vec3, v: &Vec3| {
        let (phi, psi, _) = model.fields.values(&FourVector::from_parts(*r, c * t))?;
        let root = (sign * (1.0 - vec3::norm2(v) / (c * c))).sqrt();
        let mut l = -sign * m0 * c * c * root + phi[0] * v[0] + phi[1] * v[1] + phi[2] * v[2] + c * phi[3];
        if with_psi {
            l -= a * psi * root / m0;
        }
        Ok(l)
    })
}

/// `dL/dr - d/dt dL/dv` at each interior sample of a uniformly spaced
/// trajectory, with a five-point fourth-order stencil in time. The first and
/// last two samples have no residual.
pub fn el_residual_3d(lagrangian: &impl Lagrangian3, samples: &[Sample]) -> Result<Vec<Vec3>> {
    if samples.len() < 5 {
        return Err(Error::InsufficientSampling {
            reason: format!("{} samples, need at least 5", samples.len()),
        });
    }
    let dt = samples[1].t - samples[0].t;
    if !(dt > 0.0) {
        return Err(Error::InsufficientSampling {
            reason: "time must increase".into(),
        });
    }
    if let Some(w) = samples
        .windows(2)
        .find(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::InsufficientSampling {
            reason: format!("non-uniform spacing near t = {}", w[0].t),
        });
    }
    let as_fn = |s: &Sample| {
        let t = s.t;
        move |x: &[f64; 6]| lagrangian(t, &[x[0], x[1], x[2]], &[x[3], x[4], x[5]])
    };
    let mut momentum = Vec::with_capacity(samples.len());
    let mut force = Vec::with_capacity(samples.len());
    for s in samples {
        let x = [s.r[0], s.r[1], s.r[2], s.v[0], s.v[1], s.v[2]];
        let f = as_fn(s);
        let mut p = [0.0; 3];
        let mut g = [0.0; 3];
        for l in 0..3 {
            g[l] = d1(&f, &x, l)?;
            p[l] = d1(&f, &x, 3 + l)?;
        }
        momentum.push(p);
        force.push(g);
    }
    Ok((2..samples.len() - 2)
        .map(|i| {
            std::array::from_fn(|l| {
                let p = |k: usize| momentum[k][l];
                let dp = (p(i - 2) - 8.0 * p(i - 1) + 8.0 * p(i + 1) - p(i + 2)) / (12.0 * dt);
                force[i][l] - dp
            })
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Full Chetaev system

/// All four Chetaev equations with the multiplier, `q` and `qdot` evolved
/// freely; the constraint is imposed only on the initial data.
pub fn chetaev_full_solve(model: &Model, initial: &State4, horizon: f64, settings: &Settings) -> RunResult {
    let c = model.c();
    let mut traj = Trajectory {
        regime: model.particle.regime.name(),
        c,
        settings: *settings,
        samples: Vec::new(),
        stats: Default::default(),
        diagnostics: Default::default(),
    };
    let start = model.fields.values(&initial.q);
    let m2 = match start {
        Ok((_, _, m2)) if m2 != 0.0 => m2,
        Ok(_) => return Err(Box::new(Aborted { error: Error::MasslessRegime, partial: traj })),
        Err(error) => return Err(Box::new(Aborted { error, partial: traj })),
    };
    let h2 = m2 * c * c + vec3::norm2(&initial.qdot);
    if !(h2 > 0.0) {
        return Err(Box::new(Aborted {
            error: Error::OutsideConstraintDomain { value: h2 },
            partial: traj,
        }));
    }
    let (q, qd) = (initial.q, initial.qdot);
    let y0 = [q[0], q[1], q[2], q[3], qd[0], qd[1], qd[2], h2.sqrt()];
    let mut max_residual = 0.0f64;
    let outcome = solve(
        |_, y: &[f64; 8]| {
            let q = FourVector([y[0], y[1], y[2], y[3]]);
            let u = FourVector([y[4], y[5], y[6], y[7]]);
            let a = chetaev_full_rhs(model, &q, &u)?;
            Ok([y[4], y[5], y[6], y[7], a[0], a[1], a[2], a[3]])
        },
        initial.s,
        y0,
        horizon,
        settings,
        |s, y, output| {
            if !output {
                return Ok(());
            }
            let q = FourVector([y[0], y[1], y[2], y[3]]);
            let m2 = model.fields.values(&q)?.2;
            let qdot = [y[4], y[5], y[6]];
            let residual =
                (y[7] * y[7] - vec3::norm2(&qdot) - m2 * c * c).abs() / (1.0 + m2.abs() * c * c);
            max_residual = max_residual.max(residual);
            traj.samples.push(Sample {
                s,
                t: y[3] / c,
                r: [y[0], y[1], y[2]],
                v: vec3::scale(c / y[7], &qdot),
                qdot4: y[7],
                mass: y[7] / c,
                energy: c * y[7],
                constraint_residual: residual,
                forces: Default::default(),
            });
            Ok(())
        },
    );
    traj.diagnostics.max_constraint_residual = max_residual;
    match outcome {
        Ok(stats) => {
            traj.stats = stats;
            Ok(traj)
        }
        Err(error) => Err(Box::new(Aborted { error, partial: traj })),
    }
}

// ---------------------------------------------------------------------------
// Reduced coefficients by finite differences

/// `L = -(qdot4^2 - |qdot|^2)/2 + qdot^sigma phi_sigma - psi` on
/// `x = (q^1..q^4, qdot^1..qdot^4)`.
pub fn raw_lagrangian(model: &Model) -> impl Fn(&[f64; 8]) -> Result<f64> + '_ {
    let a = model.particle.scalar_charge;
    move |x: &[f64; 8]| {
        let (phi, psi, _) = model.fields.values(&FourVector([x[0], x[1], x[2], x[3]]))?;
        let u = [x[4], x[5], x[6], x[7]];
        let kinetic = -0.5 * (u[3] * u[3] - u[0] * u[0] - u[1] * u[1] - u[2] * u[2]);
        Ok(kinetic + (0..4).map(|s| u[s] * phi[s]).sum::<f64>() - a * psi)
    }
}

/// `h = sqrt(M c^2 + |qdot|^2)` on `x = (q^1..q^4, qdot^1..qdot^3)`.
pub fn raw_normal_form(model: &Model) -> impl Fn(&[f64; 7]) -> Result<f64> + '_ {
    let c = model.c();
    move |x: &[f64; 7]| {
        let m2 = model.fields.values(&FourVector([x[0], x[1], x[2], x[3]]))?.2;
        let h2 = m2 * c * c + x[4] * x[4] + x[5] * x[5] + x[6] * x[6];
        if !(h2 > 0.0) {
            return Err(Error::OutsideConstraintDomain { value: h2 });
        }
        Ok(h2.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub closed: ReducedCoeffs,
    pub finite_difference: ReducedCoeffs,
    /// Largest `|a - b| / max(1, |a|, |b|)` over `Abar`, `Bbar`.
    pub max_deviation: f64,
    pub bbar_condition: f64,
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Largest relative deviation between two coefficient sets.
pub fn coeffs_deviation(x: &ReducedCoeffs, y: &ReducedCoeffs) -> f64 {
    let mut worst = 0.0f64;
    for l in 0..3 {
        worst = worst.max(relative_deviation(x.abar[l], y.abar[l]));
        for s in 0..3 {
            worst = worst.max(relative_deviation(x.bbar[l][s], y.bbar[l][s]));
        }
    }
    worst
}

/// Reduction with `A`, `B` and the partials of `h` all taken by finite
/// differences of [`raw_lagrangian`] and [`raw_normal_form`].
pub fn reduced_coeffs_fd(model: &Model, state: &State4) -> Result<ReducedCoeffs> {
    let lag = raw_lagrangian(model);
    let hf = raw_normal_form(model);
    let (q, qd) = (state.q, state.qdot);
    let xh = [q[0], q[1], q[2], q[3], qd[0], qd[1], qd[2]];
    let h = hf(&xh)?;
    let mut jet = NormalFormJet {
        h,
        ..Default::default()
    };
    for s in 0..4 {
        jet.dh_dq[s] = d1(&hf, &xh, s)?;
    }
    for l in 0..3 {
        jet.dh_dqdot[l] = d1(&hf, &xh, 4 + l)?;
    }

    let x = [q[0], q[1], q[2], q[3], qd[0], qd[1], qd[2], h];
    let mut ab = UnconstrainedAb {
        a: [0.0; 4],
        b: [[0.0; 4]; 4],
    };
    for s in 0..4 {
        let mut a = d1(&lag, &x, s)?;
        for n in 0..4 {
            a -= d2(&lag, &x, 4 + s, n)? * x[4 + n];
            ab.b[s][n] = -d2(&lag, &x, 4 + s, 4 + n)?;
        }
        ab.a[s] = a;
    }
    Ok(reduced_coeffs_generic(&ab, &qd, &jet))
}

/// Ratio of the extreme eigenvalue magnitudes of a symmetric 3x3 matrix.
pub fn condition_number(m: &[[f64; 3]; 3]) -> f64 {
    let mat = Matrix3::from_fn(|i, j| m[i][j]);
    let eig = SymmetricEigen::new(mat).eigenvalues;
    let abs = eig.map(f64::abs);
    let (lo, hi) = (abs.min(), abs.max());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn coefficient_oracle(model: &Model, state: &State4) -> Result<CoefficientReport> {
    let closed = reduced_coeffs_closed(model, state)?;
    let fd = reduced_coeffs_fd(model, state)?;
    Ok(CoefficientReport {
        max_deviation: coeffs_deviation(&closed, &fd),
        bbar_condition: condition_number(&closed.bbar),
        closed,
        finite_difference: fd,
    })
}

/// `cond(Bbar)` of the free closed form at velocity `qdot` for each `M`.
pub fn conditioning_sweep(qdot: &Vec3, c: f64, masses_squared: &[f64]) -> Vec<(f64, f64)> {
    masses_squared
        .iter()
        .map(|&m2| {
            let h2 = m2 * c * c + vec3::norm2(qdot);
            let bbar: [[f64; 3]; 3] = std::array::from_fn(|l| {
                std::array::from_fn(|s| qdot[l] * qdot[s] / h2 - if l == s { 1.0 } else { 0.0 })
            });
            (m2, condition_number(&bbar))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chetaev::ParticleSpec;
    use crate::expr::{parse, Env};
    use crate::fields::FieldSet;

    fn model(env: Env, phi: [&str; 4], psi: &str, particle: ParticleSpec, m: &str) -> Model {
        let mut f = FieldSet::zero(env.clone())
            .with_psi(parse(psi, &env).unwrap())
            .with_mass_squared(parse(m, &env).unwrap());
        for (i, src) in phi.iter().enumerate() {
            f = f.with_phi(i, parse(src, &env).unwrap());
        }
        Model::new(f, particle)
    }

    #[test]
    fn zero_fields_oracle_is_tight() {
        let m = model(Env::default(), ["0"; 4], "0", ParticleSpec::massive(1.0, 1.0), "1");
        let st = State4 {
            s: 0.0,
            q: FourVector::ZERO,
            qdot: [0.3, -0.2, 0.5],
        };
        let r = coefficient_oracle(&m, &st).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn conditioning_blows_up_towards_massless() {
        let sweep = conditioning_sweep(&[0.8, 0.0, 0.0], 1.0, &[1.0, 1e-2, 1e-4, 1e-6, 0.0]);
        for w in sweep.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        assert!(sweep.last().unwrap().1 > 1e12);
    }

    #[test]
    fn free_straight_line_satisfies_el() {
        let m = model(Env::default(), ["0"; 4], "0", ParticleSpec::massive(1.2, 1.0), "1");
        let samples: Vec<Sample> = (0..20)
            .map(|i| {
                let t = 0.1 * i as f64;
                Sample {
                    s: 0.0,
                    t,
                    r: [0.5 * t, -0.3 * t, 0.0],
                    v: [0.5, -0.3, 0.0],
                    qdot4: 0.0,
                    mass: 0.0,
                    energy: 0.0,
                    constraint_residual: 0.0,
                    forces: Default::default(),
                }
            })
            .collect();
        let l = standard_lagrangian(&m, false).unwrap();
        for r in el_residual_3d(&l, &samples).unwrap() {
            assert!(vec3::norm(&r) < 1e-6);
        }
        assert!(matches!(
            el_residual_3d(&l, &samples[..4]),
            Err(Error::InsufficientSampling { .. })
        ));
    }
}
