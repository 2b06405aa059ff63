use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the dynamics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expression error: {0}")]
    Expr(#[from] ExprError),

    #[error("field `{field}`: {source}")]
    Field {
        field: &'static str,
        #[source]
        source: ExprError,
    },

    #[error("velocity on the excluded hyperplane qdot4 = 0 (|qdot4| = {qdot4:e})")]
    DegenerateVelocity { qdot4: f64 },

    #[error("charge is zero: vector and scalar potentials cannot be reconstructed")]
    ChargeZero,

    #[error("state outside the constraint domain (M c^2 + |qdot|^2 = {value:e})")]
    OutsideConstraintDomain { value: f64 },

    #[error("operation undefined for the massless regime (M = 0)")]
    MasslessRegime,

    #[error("operation requires a constant mass function")]
    NonConstantMass,

    #[error("speed at the light barrier (|1 - v^2/c^2| = {gap:e})")]
    SpeedSingularity { gap: f64 },

    #[error("tachyon slowed to the light barrier (v = {speed})")]
    TachyonBarrier { speed: f64 },

    #[error("direction vector is not unit (norm = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("energy must be positive (E = {energy})")]
    NonPositiveEnergy { energy: f64 },

    #[error("tachyon momentum {p} does not exceed m0 c = {threshold}")]
    TachyonMomentumTooSmall { p: f64, threshold: f64 },

    #[error("step size underflow (h = {step:e})")]
    StepSizeUnderflow { step: f64 },

    #[error(
        "IncompatibleFields: scalar field incompatible with massless motion \
         (|F.grad psi| = {force_residual:e}, |dpsi/dt| = {dpsi_dt_residual:e})"
    )]
    IncompatibleFields {
        force_residual: f64,
        dpsi_dt_residual: f64,
    },

    #[error("insufficient sampling: {reason}")]
    InsufficientSampling { reason: String },

    #[error("integration stopped at {at}: {source}")]
    Integration {
        at: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips `Integration` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Integration { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at(self, at: f64) -> Error {
        match self {
            e @ Error::Integration { .. } => e,
            e => Error::Integration {
                at,
                source: Box::new(e),
            },
        }
    }
}
