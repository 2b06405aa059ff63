//! Executes a configuration and writes the trajectory CSV and diagnostics JSON.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nhrel_core::chetaev::{normal_form, State3, State4};
use nhrel_core::integrate::{
    integrate_3d, integrate_4d, integrate_massless, Diagnostics, Form3, Output, RunResult, Sample, Stats,
};
use nhrel_core::minkowski::vec3;
use nhrel_core::oracle::{chetaev_full_solve, coefficient_oracle};
use nhrel_core::{Error, FourVector, Trajectory};
use serde::Serialize;

use crate::config::{Initial, Parametrization, RunConfig};

pub const CSV_HEADER: &str =
    "s,t,q1,q2,q3,v1,v2,v3,qdot4,m,E,constraint_residual,FL1,FL2,FL3,FC1,FC2,FC3,FD1,FD2,FD3";

/// Process exit status by outcome class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    Ok = 0,
    Io = 1,
    Config = 2,
    Abort = 3,
    Incompatible = 4,
    Verification = 5,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    /// `s` or `t` at which the integrator stopped.
    pub at: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientCheck {
    pub states: usize,
    pub max_deviation: f64,
    pub max_bbar_condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryCheck {
    pub oracle: &'static str,
    pub max_relative_deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub coefficient_oracle: Option<CoefficientCheck>,
    pub trajectory_oracle: Option<TrajectoryCheck>,
    pub max_transverse_residual: Option<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DiagnosticsFile<'a> {
    status: ExitKind,
    error: Option<ErrorReport>,
    samples: usize,
    stats: Stats,
    diagnostics: Diagnostics,
    verification: Option<Verification>,
    config: &'a RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub exit: ExitKind,
    pub error: Option<ErrorReport>,
    pub verification: Option<Verification>,
}

pub fn error_kind(e: &Error) -> &'static str {
    match e.root() {
        Error::Expr(_) => "Expr",
        Error::Field { .. } => "Field",
        Error::DegenerateVelocity { .. } => "DegenerateVelocity",
        Error::ChargeZero => "ChargeZero",
        Error::OutsideConstraintDomain { .. } => "OutsideConstraintDomain",
        Error::MasslessRegime => "MasslessRegime",
        Error::NonConstantMass => "NonConstantMass",
        Error::SpeedSingularity { .. } => "SpeedSingularity",
        Error::TachyonBarrier { .. } => "TachyonBarrier",
        Error::NonUnitDirection { .. } => "NonUnitDirection",
        Error::NonPositiveEnergy { .. } => "NonPositiveEnergy",
        Error::TachyonMomentumTooSmall { .. } => "TachyonMomentumTooSmall",
        Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
        Error::IncompatibleFields { .. } => "IncompatibleFields",
        Error::InsufficientSampling { .. } => "InsufficientSampling",
        Error::Integration { .. } => unreachable!("root strips the wrapper"),
    }
}

fn report(e: &Error) -> ErrorReport {
    let at = match e {
        Error::Integration { at, .. } => Some(*at),
        _ => None,
    };
    ErrorReport {
        kind: error_kind(e),
        message: e.to_string(),
        at,
    }
}

fn state4(cfg: &RunConfig) -> nhrel_core::Result<State4> {
    let c = cfg.c;
    match cfg.initial {
        Initial::FourD { q, qdot } => Ok(State4 {
            s: 0.0,
            q: FourVector::new(q),
            qdot,
        }),
        Initial::ThreeD { t, r, v } => {
            let q = FourVector::from_parts(r, c * t);
            let m2 = cfg.model.sample(&q)?.mass_squared;
            // qdot = m v with m = sqrt(M / (1 - v^2/c^2))
            let m = (m2 / (1.0 - vec3::norm2(&v) / (c * c))).sqrt();
            Ok(State4 {
                s: 0.0,
                q,
                qdot: vec3::scale(m, &v),
            })
        }
        Initial::Massless { .. } => Err(Error::MasslessRegime),
    }
}

fn state3(cfg: &RunConfig) -> nhrel_core::Result<State3> {
    let c = cfg.c;
    match cfg.initial {
        Initial::ThreeD { t, r, v } => Ok(State3 { t, r, v }),
        Initial::FourD { q, qdot } => {
            let q = FourVector::new(q);
            let h = normal_form(cfg.model.sample(&q)?.mass_squared, &qdot, c)?;
            Ok(State3 {
                t: q[3] / c,
                r: q.spatial(),
                v: vec3::scale(c / h, &qdot),
            })
        }
        Initial::Massless { .. } => Err(Error::MasslessRegime),
    }
}

fn integrate(cfg: &RunConfig) -> RunResult {
    let model = &cfg.model;
    let s = &cfg.integrator;
    let early = |error: Error| {
        Box::new(nhrel_core::integrate::Aborted {
            error,
            partial: Trajectory {
                regime: model.particle.regime.name(),
                c: cfg.c,
                settings: *s,
                samples: Vec::new(),
                stats: Stats::default(),
                diagnostics: Diagnostics::default(),
            },
        })
    };
    match (cfg.initial, cfg.parametrization) {
        (Initial::Massless { t, r, e }, _) => integrate_massless(model, t, &r, &e, cfg.horizon, s),
        (_, Parametrization::S) => integrate_4d(model, &state4(cfg).map_err(early)?, cfg.horizon, s),
        (_, Parametrization::T) => integrate_3d(model, &state3(cfg).map_err(early)?, cfg.horizon, s, cfg.form),
    }
}

fn push_row(out: &mut String, x: &Sample) {
    let f = &x.forces;
    let fc = vec3::add(&f.constraint_induced, &f.dm_term);
    let cols = [
        x.s, x.t, x.r[0], x.r[1], x.r[2], x.v[0], x.v[1], x.v[2], x.qdot4, x.mass, x.energy,
        x.constraint_residual, f.lorentz[0], f.lorentz[1], f.lorentz[2], fc[0], fc[1], fc[2], f.dicke[0],
        f.dicke[1], f.dicke[2],
    ];
    for (i, v) in cols.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // Debug is the shortest representation that round-trips
        // adding zero turns -0.0 into 0.0
        let _ = write!(out, "{:?}", v + 0.0);
    }
    out.push('\n');
}

pub fn trajectory_csv(samples: &[Sample]) -> String {
    let mut out = String::with_capacity(64 + samples.len() * 320);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for x in samples {
        push_row(&mut out, x);
    }
    out
}

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

const COEFFICIENT_TOLERANCE: f64 = 1e-6;

/// Runs the independent oracles on a finished trajectory.
pub fn verify(cfg: &RunConfig, traj: &Trajectory) -> Verification {
    let mut failures = Vec::new();
    let c = cfg.c;
    if let Initial::Massless { .. } = cfg.initial {
        let transverse = traj.diagnostics.max_transverse_residual;
        if transverse.is_none_or(|t| t > 1e-12) {
            failures.push(format!("transverse force residual {transverse:?} exceeds 1e-12"));
        }
        return Verification {
            coefficient_oracle: None,
            trajectory_oracle: None,
            max_transverse_residual: transverse,
            passed: failures.is_empty(),
            failures,
        };
    }

    // closed-form coefficients against finite differences at up to 11 samples
    let n = traj.samples.len();
    let picks: Vec<usize> = if n <= 11 { (0..n).collect() } else { (0..11).map(|k| k * (n - 1) / 10).collect() };
    let mut check = CoefficientCheck {
        states: 0,
        max_deviation: 0.0,
        max_bbar_condition: 0.0,
    };
    for &i in &picks {
        let x = &traj.samples[i];
        let st = State4 {
            s: x.s,
            q: x.q(c),
            qdot: vec3::scale(x.qdot4 / c, &x.v),
        };
        match coefficient_oracle(&cfg.model, &st) {
            Ok(r) => {
                check.states += 1;
                check.max_deviation = check.max_deviation.max(r.max_deviation);
                check.max_bbar_condition = check.max_bbar_condition.max(r.bbar_condition);
            }
            Err(e) => failures.push(format!("coefficient oracle at s = {}: {e}", x.s)),
        }
    }
    if check.max_deviation >= COEFFICIENT_TOLERANCE {
        failures.push(format!(
            "closed-form coefficients deviate from finite differences by {:e}",
            check.max_deviation
        ));
    }

    let tolerance = COEFFICIENT_TOLERANCE.max(1e3 * cfg.integrator.rtol);
    let trajectory_oracle = match independent_run(cfg, traj) {
        None => None,
        Some((name, Ok(dev))) => {
            if !(dev < tolerance) {
                failures.push(format!("{name} deviates by {dev:e} (tolerance {tolerance:e})"));
            }
            Some(TrajectoryCheck {
                oracle: name,
                max_relative_deviation: dev,
                tolerance,
            })
        }
        Some((name, Err(e))) => {
            failures.push(format!("{name} failed: {e}"));
            None
        }
    };

    Verification {
        coefficient_oracle: Some(check),
        trajectory_oracle,
        max_transverse_residual: None,
        passed: failures.is_empty(),
        failures,
    }
}

/// Endpoint deviation from a second, independently formulated integration
/// of the same motion.
fn independent_run(cfg: &RunConfig, traj: &Trajectory) -> Option<(&'static str, Result<f64, String>)> {
    let c = cfg.c;
    let end = traj.samples.last().filter(|_| traj.samples.len() > 1)?;
    let settings = cfg.integrator.with_output(Output::Steps);
    let compare = |other: RunResult, observer: bool| -> Result<f64, String> {
        let o = other.map_err(|e| e.to_string())?;
        let last = o.samples.last().ok_or("no samples")?;
        Ok(if observer {
            relative(&end.r, &last.r).max(relative(&end.v, &last.v))
        } else {
            relative(&end.q(c).0, &last.q(c).0)
        })
    };
    let st4 = state4(cfg).map_err(|e| e.to_string());
    let st3 = state3(cfg).map_err(|e| e.to_string());
    Some(match (cfg.parametrization, cfg.form, cfg.model.particle.regime.rest_mass()) {
        (Parametrization::S, _, _) => (
            "full Chetaev system",
            st4.and_then(|st| compare(chetaev_full_solve(&cfg.model, &st, end.s, &settings), false)),
        ),
        (Parametrization::T, Form3::Psi, Some(_)) => (
            "rest-mass form",
            st3.and_then(|st| compare(integrate_3d(&cfg.model, &st, end.t - st.t, &settings, Form3::Dicke), true)),
        ),
        (Parametrization::T, Form3::Dicke, _) => (
            "scalar-field form",
            st3.and_then(|st| compare(integrate_3d(&cfg.model, &st, end.t - st.t, &settings, Form3::Psi), true)),
        ),
        // no second observer form: run the s equations to the same s
        (Parametrization::T, Form3::Psi, None) => (
            "four-dimensional equations",
            st4.and_then(|st| compare(integrate_4d(&cfg.model, &st, end.s, &settings), false)),
        ),
    })
}

/// Integrates, writes `<name>.csv` and `<name>.json` into `out_dir`, and
/// classifies the outcome. Integration failures still produce both files
/// with the samples recorded before the failure.
pub fn execute(cfg: &RunConfig, out_dir: &Path) -> io::Result<RunReport> {
    fs::create_dir_all(out_dir)?;
    let (traj, error) = match integrate(cfg) {
        Ok(t) => (t, None),
        Err(aborted) => {
            let a = *aborted;
            (a.partial, Some(a.error))
        }
    };
    let verification = (cfg.verify && error.is_none()).then(|| verify(cfg, &traj));
    let exit = match (&error, &verification) {
        (Some(e), _) if matches!(e.root(), Error::IncompatibleFields { .. }) => ExitKind::Incompatible,
        (Some(_), _) => ExitKind::Abort,
        (None, Some(v)) if !v.passed => ExitKind::Verification,
        _ => ExitKind::Ok,
    };
    let error = error.as_ref().map(report);

    let csv = out_dir.join(format!("{}.csv", cfg.output.name));
    let json = out_dir.join(format!("{}.json", cfg.output.name));
    fs::write(&csv, trajectory_csv(&traj.samples))?;
    let file = DiagnosticsFile {
        status: exit,
        error: error.clone(),
        samples: traj.samples.len(),
        stats: traj.stats,
        diagnostics: traj.diagnostics,
        verification: verification.clone(),
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&file).map_err(io::Error::other)?;
    fs::write(&json, text + "\n")?;
    Ok(RunReport {
        csv,
        json,
        exit,
        error,
        verification,
    })
}
