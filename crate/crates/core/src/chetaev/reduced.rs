//! Reduced Chetaev coefficients and the four-dimensional equations of motion.

use serde::Serialize;

use super::{Model, State4, SPEED_GUARD};
use crate::error::{Error, Result};
use crate::expr::Dual;
use crate::fields::{faraday, FieldSample, Mat4};
use crate::minkowski::{vec3, FourVector, Vec3};

pub type Mat3 = [[f64; 3]; 3];

/// Coefficients of the unconstrained Euler-Lagrange expressions
/// `A_sigma + B_sigma_nu qddot^nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnconstrainedAb {
    pub a: [f64; 4],
    pub b: Mat4,
}

/// `h(s, q, qdot^1..3)` and the partials entering the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NormalFormJet {
    pub h: f64,
    pub dh_dqdot: Vec3,
    pub dh_ds: f64,
    pub dh_dq: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedCoeffs {
    pub abar: Vec3,
    pub bbar: Mat3,
    pub jet: NormalFormJet,
}

impl ReducedCoeffs {
    pub fn h(&self) -> f64 {
        self.jet.h
    }
}

pub fn unconstrained_ab(sample: &FieldSample, qdot: &FourVector) -> UnconstrainedAb {
    let f = faraday(sample);
    let a = std::array::from_fn(|s| {
        (0..4).map(|n| qdot[n] * f[n][s]).sum::<f64>() - sample.dpsi[s]
    });
    let mut b = [[0.0; 4]; 4];
    for (s, row) in b.iter_mut().enumerate() {
        row[s] = if s == 3 { 1.0 } else { -1.0 };
    }
    UnconstrainedAb { a, b }
}

/// `M c^2 + |qdot|^2`, checked against the domain and the light barrier.
fn h_squared(m2: f64, qdot: &Vec3, c: f64) -> Result<f64> {
    let h2 = m2 * c * c + vec3::norm2(qdot);
    if !(h2 > 0.0) {
        return Err(Error::OutsideConstraintDomain { value: h2 });
    }
    if m2 != 0.0 {
        let gap = m2.abs() * c * c / h2;
        if gap < SPEED_GUARD {
            return Err(Error::SpeedSingularity { gap });
        }
    }
    Ok(h2)
}

/// `qdot4 = h = sqrt(M c^2 + |qdot|^2)`.
pub fn normal_form(mass_squared: f64, qdot: &Vec3, c: f64) -> Result<f64> {
    let h = h_squared(mass_squared, qdot, c)?.sqrt();
    if h < 1e-12 * vec3::norm(qdot).max(1.0) {
        return Err(Error::DegenerateVelocity { qdot4: h });
    }
    Ok(h)
}

/// Partials of `h` by forward-mode differentiation in `(q, qdot)`.
pub fn normal_form_jet(sample: &FieldSample, qdot: &Vec3, c: f64) -> Result<NormalFormJet> {
    let h = normal_form(sample.mass_squared, qdot, c)?;
    let mut m = Dual::<7>::constant(sample.mass_squared);
    m.partials[..4].copy_from_slice(&sample.dmass_squared);
    let mut h2 = m * (c * c);
    for (l, &x) in qdot.iter().enumerate() {
        let v = Dual::<7>::variable(x, 4 + l);
        h2 = h2 + v * v;
    }
    let hd = h2.sqrt();
    debug_assert!((hd.value - h).abs() <= 1e-12 * h);
    Ok(NormalFormJet {
        h,
        dh_dqdot: [hd.partials[4], hd.partials[5], hd.partials[6]],
        dh_ds: 0.0,
        dh_dq: [hd.partials[0], hd.partials[1], hd.partials[2], hd.partials[3]],
    })
}

/// Reduction of `A`, `B` onto the constraint `qdot4 = h`:
///
/// `Abar_l = A_l + h_l A_4 + (B_l4 + h_l B_44)(dh/ds + dh/dq^sigma qdot^sigma)`,
/// `Bbar_ls = B_ls + B_l4 h_s + h_l B_4s + B_44 h_l h_s`,
/// with `h_l = dh/dqdot^l`. `ab` must be evaluated at `qdot4 = h`.
pub fn reduced_coeffs_generic(ab: &UnconstrainedAb, qdot: &Vec3, jet: &NormalFormJet) -> ReducedCoeffs {
    let (a, b, hl) = (&ab.a, &ab.b, &jet.dh_dqdot);
    let full = [qdot[0], qdot[1], qdot[2], jet.h];
    let dh_flow = jet.dh_ds + (0..4).map(|s| jet.dh_dq[s] * full[s]).sum::<f64>();
    let abar = std::array::from_fn(|l| a[l] + hl[l] * a[3] + (b[l][3] + hl[l] * b[3][3]) * dh_flow);
    let bbar = std::array::from_fn(|l| {
        std::array::from_fn(|s| b[l][s] + b[l][3] * hl[s] + hl[l] * b[3][s] + b[3][3] * hl[l] * hl[s])
    });
    ReducedCoeffs {
        abar,
        bbar,
        jet: *jet,
    }
}

/// Generic reduction fed by exact (dual-number) partials.
pub fn reduced_coeffs_dual(model: &Model, state: &State4) -> Result<ReducedCoeffs> {
    let sample = model.sample(&state.q)?;
    let jet = normal_form_jet(&sample, &state.qdot, model.c())?;
    let ab = unconstrained_ab(&sample, &FourVector::from_parts(state.qdot, jet.h));
    Ok(reduced_coeffs_generic(&ab, &state.qdot, &jet))
}

/// Closed form for the Minkowski Lagrangian:
///
/// `Abar_l = qdot^i F_il + h F_4l - psi_l + (qdot^l/h)(qdot^i F_i4 - psi_4 + c^2 M_sigma qdot^sigma / (2h))`,
/// `Bbar = -I + qdot qdot^T / h^2`.
pub fn reduced_coeffs_closed(model: &Model, state: &State4) -> Result<ReducedCoeffs> {
    let c = model.c();
    let sample = model.sample(&state.q)?;
    let qd = &state.qdot;
    let h = normal_form(sample.mass_squared, qd, c)?;
    let f = faraday(&sample);
    let full = [qd[0], qd[1], qd[2], h];
    let dm_flow: f64 = (0..4).map(|s| sample.dmass_squared[s] * full[s]).sum();
    let temporal = (0..3).map(|i| qd[i] * f[i][3]).sum::<f64>() - sample.dpsi[3]
        + c * c * dm_flow / (2.0 * h);
    let abar = std::array::from_fn(|l| {
        (0..3).map(|i| qd[i] * f[i][l]).sum::<f64>() + h * f[3][l] - sample.dpsi[l]
            + qd[l] / h * temporal
    });
    let bbar = std::array::from_fn(|l| {
        std::array::from_fn(|s| qd[l] * qd[s] / (h * h) - if l == s { 1.0 } else { 0.0 })
    });
    let k = c * c / (2.0 * h);
    Ok(ReducedCoeffs {
        abar,
        bbar,
        jet: NormalFormJet {
            h,
            dh_dqdot: [qd[0] / h, qd[1] / h, qd[2] / h],
            dh_ds: 0.0,
            dh_dq: sample.dmass_squared.map(|d| k * d),
        },
    })
}

/// `Bbar^{-1} = -(M c^2 I + qdot qdot^T) / (M c^2)`.
pub fn bbar_inverse_closed(mass_squared: f64, qdot: &Vec3, c: f64) -> Result<Mat3> {
    if mass_squared == 0.0 {
        return Err(Error::MasslessRegime);
    }
    let mc2 = mass_squared * c * c;
    Ok(std::array::from_fn(|j| {
        std::array::from_fn(|l| -(qdot[j] * qdot[l] + if j == l { mc2 } else { 0.0 }) / mc2)
    }))
}

/// `qddot^j = -Bbar^{jl} Abar_l`, written out:
///
/// `qdot^l F_lj + h F_4j - psi_j - (qdot^j / M c^2)(qdot^l psi_l + h psi_4) + qdot^j (dM/ds) / (2M)`.
pub fn rhs_4d(model: &Model, state: &State4) -> Result<Vec3> {
    let c = model.c();
    let sample = model.sample(&state.q)?;
    let m2 = sample.mass_squared;
    if m2 == 0.0 {
        return Err(Error::MasslessRegime);
    }
    let qd = &state.qdot;
    let h = normal_form(m2, qd, c)?;
    let f = faraday(&sample);
    let full = [qd[0], qd[1], qd[2], h];
    let dpsi_ds: f64 = (0..4).map(|s| sample.dpsi[s] * full[s]).sum();
    let dm_ds: f64 = (0..4).map(|s| sample.dmass_squared[s] * full[s]).sum();
    let along = dm_ds / (2.0 * m2) - dpsi_ds / (m2 * c * c);
    Ok(std::array::from_fn(|j| {
        (0..3).map(|l| qd[l] * f[l][j]).sum::<f64>() + h * f[3][j] - sample.dpsi[j] + qd[j] * along
    }))
}

/// `lambda = (h / M c^2) d/ds (M c^2 / 2 - psi)` along the flow on the constraint.
pub fn chetaev_multiplier(model: &Model, state: &State4) -> Result<f64> {
    let c = model.c();
    let sample = model.sample(&state.q)?;
    let m2 = sample.mass_squared;
    if m2 == 0.0 {
        return Err(Error::MasslessRegime);
    }
    let h = normal_form(m2, &state.qdot, c)?;
    Ok(multiplier_at(&sample, &FourVector::from_parts(state.qdot, h), c))
}

/// Multiplier with `h` taken from the given `qdot4` rather than the normal form.
pub(crate) fn multiplier_at(sample: &FieldSample, qdot: &FourVector, c: f64) -> f64 {
    let m2 = sample.mass_squared;
    let dpsi_ds: f64 = (0..4).map(|s| sample.dpsi[s] * qdot[s]).sum();
    let dm_ds: f64 = (0..4).map(|s| sample.dmass_squared[s] * qdot[s]).sum();
    qdot[3] / (m2 * c * c) * (0.5 * c * c * dm_ds - dpsi_ds)
}

/// All four Chetaev equations solved for `qddot` at an arbitrary `qdot`:
/// `qddot^l = A_l + lambda qdot^l / qdot4`, `qddot^4 = lambda - A_4`.
pub fn chetaev_full_rhs(model: &Model, q: &FourVector, qdot: &FourVector) -> Result<[f64; 4]> {
    let c = model.c();
    let sample = model.sample(q)?;
    if sample.mass_squared == 0.0 {
        return Err(Error::MasslessRegime);
    }
    if crate::minkowski::degenerate_qdot4(qdot) {
        return Err(Error::DegenerateVelocity { qdot4: qdot[3] });
    }
    let ab = unconstrained_ab(&sample, qdot);
    let lambda = multiplier_at(&sample, qdot, c);
    let h = qdot[3];
    Ok([
        ab.a[0] + lambda * qdot[0] / h,
        ab.a[1] + lambda * qdot[1] / h,
        ab.a[2] + lambda * qdot[2] / h,
        lambda - ab.a[3],
    ])
}
