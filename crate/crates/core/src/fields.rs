//! External fields: four-potential `phi`, scalar potential `psi` and the
//! mass function `M`, evaluated together with their first partials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{eval, eval_dual, Env, Expr};
use crate::minkowski::{vec3, FourVector, Vec3};

pub type Mat4 = [[f64; 4]; 4];

const PHI_NAMES: [&str; 4] = ["phi1", "phi2", "phi3", "phi4"];

/// Field expressions plus the environment binding their constants.
///
/// `phi` already carries the charge: `phi_l = (e/c) A_l`, `phi_4 = -(e/c) V`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub phi: [Expr; 4],
    pub psi: Expr,
    pub mass_squared: Expr,
    pub env: Env,
}

/// Field values and partials at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldSample {
    pub phi: [f64; 4],
    /// `dphi[sigma][nu] = d phi_sigma / d q^nu`.
    pub dphi: Mat4,
    pub psi: f64,
    pub dpsi: [f64; 4],
    pub mass_squared: f64,
    pub dmass_squared: [f64; 4],
}

/// Three-dimensional electromagnetic data recovered from `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Em3d {
    pub rot_a: Vec3,
    pub da_dt: Vec3,
    pub grad_v: Vec3,
}

impl FieldSet {
    /// All fields zero, `M = 0`.
    pub fn zero(env: Env) -> Self {
        FieldSet {
            phi: std::array::from_fn(|_| Expr::zero()),
            psi: Expr::zero(),
            mass_squared: Expr::zero(),
            env,
        }
    }

    pub fn c(&self) -> f64 {
        self.env.c
    }

    pub fn with_phi(mut self, sigma: usize, e: Expr) -> Self {
        self.phi[sigma] = e;
        self
    }

    pub fn with_psi(mut self, e: Expr) -> Self {
        self.psi = e;
        self
    }

    pub fn with_mass_squared(mut self, e: Expr) -> Self {
        self.mass_squared = e;
        self
    }

    /// Builds `phi` from a vector potential `A` and scalar potential `V`
    /// for a particle of charge `charge`.
    pub fn with_potentials(mut self, a: [Expr; 3], v: Expr, charge: f64) -> Self {
        let k = charge / self.env.c;
        let [a1, a2, a3] = a;
        self.phi = [
            Expr::mul(Expr::Num(k), a1),
            Expr::mul(Expr::Num(k), a2),
            Expr::mul(Expr::Num(k), a3),
            Expr::mul(Expr::Num(-k), v),
        ];
        self
    }

    pub fn sample(&self, q: &FourVector) -> Result<FieldSample> {
        let field = |name: &'static str, e: &Expr| {
            eval_dual(e, q, &self.env).map_err(|source| Error::Field {
                field: name,
                source,
            })
        };
        let mut s = FieldSample::default();
        for (sigma, e) in self.phi.iter().enumerate() {
            let d = field(PHI_NAMES[sigma], e)?;
            s.phi[sigma] = d.value;
            s.dphi[sigma] = d.partials;
        }
        let psi = field("psi", &self.psi)?;
        s.psi = psi.value;
        s.dpsi = psi.partials;
        let m = field("M", &self.mass_squared)?;
        s.mass_squared = m.value;
        s.dmass_squared = m.partials;
        Ok(s)
    }

    /// Plain values `(phi, psi, M)` without derivatives.
    pub fn values(&self, q: &FourVector) -> Result<([f64; 4], f64, f64)> {
        let field = |name: &'static str, e: &Expr| {
            eval(e, q, &self.env).map_err(|source| Error::Field {
                field: name,
                source,
            })
        };
        let mut phi = [0.0; 4];
        for (sigma, e) in self.phi.iter().enumerate() {
            phi[sigma] = field(PHI_NAMES[sigma], e)?;
        }
        Ok((
            phi,
            field("psi", &self.psi)?,
            field("M", &self.mass_squared)?,
        ))
    }

    pub fn em_3d(&self, t: f64, r: Vec3, charge: f64) -> Result<Em3d> {
        let c = self.env.c;
        let s = self.sample(&FourVector::from_parts(r, c * t))?;
        em_3d(&s, charge, c)
    }
}

/// `F[sigma][nu] = d phi_sigma / d q^nu - d phi_nu / d q^sigma`.
pub fn faraday(sample: &FieldSample) -> Mat4 {
    let d = &sample.dphi;
    std::array::from_fn(|s| std::array::from_fn(|n| d[s][n] - d[n][s]))
}

/// `rot A`, `dA/dt` and `grad V` from a sample, using `q4 = c t`.
pub fn em_3d(sample: &FieldSample, charge: f64, c: f64) -> Result<Em3d> {
    if charge == 0.0 {
        return Err(Error::ChargeZero);
    }
    let k = c / charge;
    let d = &sample.dphi;
    Ok(Em3d {
        rot_a: [
            k * (d[2][1] - d[1][2]),
            k * (d[0][2] - d[2][0]),
            k * (d[1][0] - d[0][1]),
        ],
        da_dt: std::array::from_fn(|l| k * c * d[l][3]),
        grad_v: std::array::from_fn(|l| -k * d[3][l]),
    })
}

/// `e (v x rot A / c - dA/dt / c - grad V)` written through `phi`:
/// component `j` is `v^l F[l][j] + c F[4][j]`. Valid for any charge.
pub fn lorentz_force(sample: &FieldSample, v: &Vec3, c: f64) -> Vec3 {
    let f = faraday(sample);
    std::array::from_fn(|j| v[0] * f[0][j] + v[1] * f[1][j] + v[2] * f[2][j] + c * f[3][j])
}

/// Same force assembled from the reconstructed `A` and `V`.
pub fn lorentz_force_em(em: &Em3d, v: &Vec3, charge: f64, c: f64) -> Vec3 {
    let vxb = vec3::cross(v, &em.rot_a);
    std::array::from_fn(|j| charge * (vxb[j] / c - em.da_dt[j] / c - em.grad_v[j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn fs(env: &Env, phi: [&str; 4], psi: &str) -> FieldSet {
        let mut f = FieldSet::zero(env.clone()).with_psi(parse(psi, env).unwrap());
        for (i, src) in phi.iter().enumerate() {
            f = f.with_phi(i, parse(src, env).unwrap());
        }
        f
    }

    #[test]
    fn sample_scalar_gradient() {
        let env = Env::default().with_param("k", 2.0);
        let s = fs(&env, ["0"; 4], "k*q1")
            .sample(&FourVector::new([1.0, 0.0, 0.0, 0.0]))
            .unwrap();
        assert_eq!(s.psi, 2.0);
        assert_eq!(s.dpsi, [2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sample_potential_partials() {
        let env = Env::default();
        let s = fs(&env, ["0", "0", "0", "-q1"], "0")
            .sample(&FourVector::new([0.3, 0.1, 0.0, 2.0]))
            .unwrap();
        let mut expected = [[0.0; 4]; 4];
        expected[3][0] = -1.0;
        assert_eq!(s.dphi, expected);
    }

    #[test]
    fn sample_reports_field_name() {
        let env = Env::default();
        let err = fs(&env, ["0"; 4], "log(q1)")
            .sample(&FourVector::ZERO)
            .unwrap_err();
        assert!(matches!(err, Error::Field { field: "psi", .. }));
    }

    #[test]
    fn faraday_examples() {
        let env = Env::default();
        let s = fs(&env, ["q2", "0", "0", "0"], "0")
            .sample(&FourVector::new([0.5, 0.5, 0.5, 0.5]))
            .unwrap();
        let f = faraday(&s);
        let mut expected = [[0.0; 4]; 4];
        expected[0][1] = 1.0;
        expected[1][0] = -1.0;
        assert_eq!(f, expected);

        // pure gauge: phi = grad(q1 q2 sin(q4))
        let s = fs(
            &env,
            ["q2*sin(q4)", "q1*sin(q4)", "0", "q1*q2*cos(q4)"],
            "0",
        )
        .sample(&FourVector::new([0.7, -1.3, 0.2, 0.9]))
        .unwrap();
        for row in faraday(&s) {
            for x in row {
                assert!(x.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn em_3d_examples() {
        let c = 2.0;
        let e = 3.0;
        let k = e / c;
        let env = Env::new(c).with_param("k", k);
        let zero = fs(&env, ["0"; 4], "0");
        let em = zero.em_3d(0.0, [1.0, 2.0, 3.0], e).unwrap();
        assert_eq!((em.rot_a, em.da_dt, em.grad_v), ([0.0; 3], [0.0; 3], [0.0; 3]));

        let e0 = 1.5;
        let env = env.with_param("E0", e0);
        let uniform_e = fs(&env, ["0", "0", "0", "-k*E0*q1"], "0");
        let em = uniform_e.em_3d(0.0, [0.1, 0.2, 0.3], e).unwrap();
        assert!((em.grad_v[0] - e0).abs() < 1e-14);
        assert_eq!(&em.grad_v[1..], &[0.0, 0.0]);

        let b0 = 0.8;
        let env = env.with_param("B0", b0);
        let uniform_b = fs(&env, ["-k*(B0/2)*q2", "k*(B0/2)*q1", "0", "0"], "0");
        let em = uniform_b.em_3d(0.0, [0.1, 0.2, 0.3], e).unwrap();
        assert!(em.rot_a[0].abs() < 1e-15 && em.rot_a[1].abs() < 1e-15);
        assert!((em.rot_a[2] - b0).abs() < 1e-14);
    }

    #[test]
    fn em_3d_requires_charge() {
        let f = FieldSet::zero(Env::default());
        assert_eq!(f.em_3d(0.0, [0.0; 3], 0.0), Err(Error::ChargeZero));
    }

    #[test]
    fn potentials_convention() {
        let env = Env::new(2.0);
        let f = FieldSet::zero(env.clone()).with_potentials(
            [Expr::var(1), Expr::zero(), Expr::zero()],
            Expr::var(0),
            4.0,
        );
        let s = f.sample(&FourVector::new([1.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(s.phi, [2.0, 0.0, 0.0, -2.0]);
    }
}
