//! `M = 0`: motion at speed `c` along a unit direction `e_v`, driven by the
//! component of the Lorentz force transverse to `e_v`.

use serde::Serialize;

use super::Model;
use crate::error::{Error, Result};
use crate::fields::{faraday, FieldSample};
use crate::minkowski::{vec3, FourVector, Vec3};

const UNIT_TOLERANCE: f64 = 1e-9;

/// Residuals of the fields compatibility condition; both vanish when motion is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compatibility {
    /// `|F . grad psi|`.
    pub force: f64,
    /// `|dpsi/dt|` along `c e_v`.
    pub dpsi_dt: f64,
    /// `c |grad psi| + |dpsi/dt_partial|`, the natural scale of both residuals.
    pub scale: f64,
}

/// `F = c (G - (e.G) e)` with `G_j = e^l F_lj + F_4j`: the Lorentz force at
/// `v = c e` with its component along `e` removed.
pub fn massless_force(sample: &FieldSample, e: &Vec3, c: f64) -> Vec3 {
    let f = faraday(sample);
    let g: Vec3 = std::array::from_fn(|j| e[0] * f[0][j] + e[1] * f[1][j] + e[2] * f[2][j] + f[3][j]);
    let along = vec3::dot(e, &g);
    std::array::from_fn(|j| c * (g[j] - along * e[j]))
}

fn check_direction(e: &Vec3) -> Result<()> {
    let norm = vec3::norm(e);
    if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(Error::NonUnitDirection { norm });
    }
    Ok(())
}

/// `de/dt = (c / E) F`.
pub fn massless_rhs(model: &Model, t: f64, r: &Vec3, e: &Vec3, energy: f64) -> Result<Vec3> {
    check_direction(e)?;
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy { energy });
    }
    let c = model.c();
    let sample = model.sample(&FourVector::from_parts(*r, c * t))?;
    let f = massless_force(&sample, e, c);
    Ok(vec3::scale(c / energy, &f))
}

/// `(|F . grad psi|, |c e . grad psi + dpsi/dt|)` with `psi` scaled by the
/// particle's scalar charge.
pub fn fields_compatibility(model: &Model, t: f64, r: &Vec3, e: &Vec3) -> Result<Compatibility> {
    check_direction(e)?;
    let c = model.c();
    let sample = model.sample(&FourVector::from_parts(*r, c * t))?;
    let grad: Vec3 = [sample.dpsi[0], sample.dpsi[1], sample.dpsi[2]];
    let dpsi_dt_partial = c * sample.dpsi[3];
    let f = massless_force(&sample, e, c);
    Ok(Compatibility {
        force: vec3::dot(&f, &grad).abs(),
        dpsi_dt: (c * vec3::dot(e, &grad) + dpsi_dt_partial).abs(),
        scale: c * vec3::norm(&grad) + dpsi_dt_partial.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chetaev::ParticleSpec;
    use crate::expr::{parse, Env, Expr};
    use crate::fields::FieldSet;

    fn model(env: Env, phi: [&str; 4], psi: &str, a: f64) -> Model {
        let mut f = FieldSet::zero(env.clone()).with_psi(parse(psi, &env).unwrap());
        for (i, src) in phi.iter().enumerate() {
            f = f.with_phi(i, parse(src, &env).unwrap());
        }
        Model::new(f, ParticleSpec::massless(1.0, Expr::Num(1.0)).with_scalar_charge(a))
    }

    #[test]
    fn uncharged_goes_straight() {
        let m = model(Env::default(), ["0"; 4], "0", 0.0);
        let d = massless_rhs(&m, 0.0, &[0.0; 3], &[0.6, 0.8, 0.0], 2.0).unwrap();
        assert_eq!(d, [0.0; 3]);
    }

    #[test]
    fn projection_of_potential_gradient() {
        // phi_4 = -(e/c) V with V = x: grad V along x
        let m = model(Env::default(), ["0", "0", "0", "-q1"], "0", 0.0);
        let s = m.sample(&FourVector::ZERO).unwrap();
        assert_eq!(massless_force(&s, &[1.0, 0.0, 0.0], 1.0), [0.0; 3]);
        let f = massless_force(&s, &[0.0, 1.0, 0.0], 1.0);
        assert_eq!(f, [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn force_is_transverse() {
        let env = Env::new(1.7);
        let m = model(env, ["q2*q4", "sin(q3)", "q1^2", "-q1*q2 + q4"], "0", 0.0);
        let s = m.sample(&FourVector::new([0.3, -0.7, 1.1, 0.4])).unwrap();
        let e = [0.48, 0.6, 0.64];
        let f = massless_force(&s, &e, 1.7);
        assert!(vec3::dot(&f, &e).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let m = model(Env::default(), ["0"; 4], "0", 0.0);
        assert!(matches!(
            massless_rhs(&m, 0.0, &[0.0; 3], &[1.0, 1.0, 0.0], 1.0),
            Err(Error::NonUnitDirection { .. })
        ));
        assert!(matches!(
            massless_rhs(&m, 0.0, &[0.0; 3], &[1.0, 0.0, 0.0], 0.0),
            Err(Error::NonPositiveEnergy { .. })
        ));
    }

    #[test]
    fn compatibility_examples() {
        let m = model(Env::default(), ["q2", "0", "0", "q1"], "2.5", 1.0);
        let r = fields_compatibility(&m, 0.0, &[0.1; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!((r.force, r.dpsi_dt), (0.0, 0.0));

        let m = model(Env::default(), ["0"; 4], "q1", 1.0);
        let r = fields_compatibility(&m, 0.0, &[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.dpsi_dt, 1.0);

        // F along y by a uniform E field in y, psi = psi(x)
        let m = model(Env::default(), ["0", "0", "0", "-q2"], "q1^2", 1.0);
        let r = fields_compatibility(&m, 0.0, &[0.5, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.force, 0.0);
    }
}
