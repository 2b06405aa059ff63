//! Relativistic particle dynamics as a Lagrangian system with the
//! nonholonomic constraint `g(u, u) = M c^2`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::should_implement_trait)]

pub mod chetaev;
pub mod error;
pub mod expr;
pub mod fields;
pub mod integrate;
pub mod minkowski;
pub mod oracle;
pub mod scenarios;

pub use chetaev::{Model, ParticleSpec, Regime, State3, State4};
pub use error::{Error, Result};
pub use expr::{parse, Env, Expr, ExprError};
pub use fields::{FieldSample, FieldSet};
pub use integrate::{Settings, Trajectory};
pub use minkowski::{FourVector, Metric, Vec3};
