//! INI run configuration.
//!
//! ```ini
//! [particle]
//! regime = massive
//! m0 = 1
//!
//! [fields]
//! phi1 = "-0.5*B*q2"
//! phi2 = "0.5*B*q1"
//!
//! [params]
//! B = 1
//!
//! [initial]
//! v1 = 0.5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::{Ini, ParseOption};
use nhrel_core::chetaev::normal_form;
use nhrel_core::integrate::{Form3, Output};
use nhrel_core::minkowski::vec3;
use nhrel_core::{parse, Env, Expr, ExprError, FieldSet, FourVector, Model, ParticleSpec, Settings, Vec3};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Syntax(String),
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("{key}: {source}")]
    Expr {
        key: String,
        #[source]
        source: ExprError,
    },
}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    Massive,
    Tachyon,
    Massless,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametrization {
    /// Four-dimensional equations in the evolution parameter `s`.
    S,
    /// Observer time.
    T,
}

/// Starting point; exactly one form per configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Initial {
    FourD { q: [f64; 4], qdot: Vec3 },
    ThreeD { t: f64, r: Vec3, v: Vec3 },
    /// Unit direction, normalized at load.
    Massless { t: f64, r: Vec3, e: Vec3 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSource {
    Phi { phi: [String; 4] },
    Potentials { a: [String; 3], v: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleConfig {
    pub regime: RegimeName,
    pub m0: Option<f64>,
    pub charge: f64,
    pub scalar_charge: f64,
    pub psi_bar: bool,
    pub energy: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub name: String,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub particle: ParticleConfig,
    pub c: f64,
    pub params: BTreeMap<String, f64>,
    pub fields: FieldSource,
    pub psi: String,
    pub mass_squared: Option<String>,
    pub initial: Initial,
    pub horizon: f64,
    pub parametrization: Parametrization,
    pub form: Form3,
    pub integrator: Settings,
    pub output: OutputConfig,
    pub verify: bool,
    #[serde(skip)]
    pub model: Model,
}

const SECTIONS: [(&str, &[&str]); 8] = [
    ("particle", &["regime", "m0", "charge", "scalar_charge", "psi_bar", "energy"]),
    ("constants", &["c"]),
    ("params", &[]),
    ("fields", &["phi1", "phi2", "phi3", "phi4", "A1", "A2", "A3", "V", "psi", "M"]),
    (
        "initial",
        &[
            "q1", "q2", "q3", "q4", "qdot1", "qdot2", "qdot3", "qdot4", "t", "r1", "r2", "r3", "v1", "v2", "v3",
            "e1", "e2", "e3",
        ],
    ),
    ("run", &["horizon", "parametrization", "form"]),
    ("integrator", &["rtol", "atol", "h0", "fixed_step", "max_steps", "output_dt"]),
    ("output", &["dir", "name"]),
];

const RESERVED: [&str; 6] = ["q1", "q2", "q3", "q4", "c", "pi"];

struct Raw<'a> {
    ini: &'a Ini,
}

impl Raw<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.get_from(Some(section), key).map(str::trim)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.get(section, key).is_some()
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(section, key)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| invalid(format!("{section}.{key}"), format!("`{s}` is not a finite number")))
            })
            .transpose()
    }

    fn positive(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.number(section, key)? {
            Some(x) if x <= 0.0 => Err(invalid(format!("{section}.{key}"), "must be positive")),
            other => Ok(other),
        }
    }

    fn or_zero(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        Ok(self.number(section, key)?.unwrap_or(0.0))
    }

    fn flag(&self, section: &str, key: &str) -> Result<bool, ConfigError> {
        match self.get(section, key) {
            None => Ok(false),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(s) => Err(invalid(format!("{section}.{key}"), format!("`{s}` is not a boolean"))),
        }
    }
}

fn check_keys(ini: &Ini) -> Result<(), ConfigError> {
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(invalid(key, "key outside any section"));
            }
            continue;
        };
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
            return Err(invalid(name, "unknown section"));
        };
        if name == "params" {
            continue;
        }
        for (key, _) in props.iter() {
            if !allowed.contains(&key) {
                return Err(invalid(format!("{name}.{key}"), "unknown key"));
            }
        }
    }
    Ok(())
}

/// Regime preset, either `massive` with a separate `m0` or `massive(1.5)`.
fn regime(raw: &Raw) -> Result<(RegimeName, Option<f64>), ConfigError> {
    let text = raw
        .get("particle", "regime")
        .ok_or_else(|| invalid("particle.regime", "missing"))?;
    let (name, inline) = match text.split_once('(') {
        Some((name, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .and_then(|a| a.trim().parse::<f64>().ok())
                .ok_or_else(|| invalid("particle.regime", format!("cannot read `{text}`")))?;
            (name.trim(), Some(arg))
        }
        None => (text, None),
    };
    let regime = match name {
        "massive" => RegimeName::Massive,
        "tachyon" => RegimeName::Tachyon,
        "massless" => RegimeName::Massless,
        "general" => RegimeName::General,
        other => {
            return Err(invalid(
                "particle.regime",
                format!("unknown regime `{other}` (massive, tachyon, massless, general)"),
            ))
        }
    };
    let keyed = raw.positive("particle", "m0")?;
    let m0 = match (inline, keyed) {
        (Some(_), Some(_)) => return Err(invalid("particle.m0", "rest mass given twice")),
        (a, b) => a.or(b),
    };
    match regime {
        RegimeName::Massive | RegimeName::Tachyon => {
            let m0 = m0.ok_or_else(|| invalid("particle.m0", "required for this regime"))?;
            if !(m0 > 0.0) {
                return Err(invalid("particle.m0", "must be positive"));
            }
            Ok((regime, Some(m0)))
        }
        _ if m0.is_some() => Err(invalid("particle.m0", "only massive and tachyon regimes have a rest mass")),
        _ => Ok((regime, None)),
    }
}

fn compile(key: &str, src: &str, env: &Env) -> Result<Expr, ConfigError> {
    parse(src, env).map_err(|source| ConfigError::Expr {
        key: key.to_owned(),
        source,
    })
}

fn vector(raw: &Raw, prefix: &str) -> Result<Vec3, ConfigError> {
    Ok([
        raw.or_zero("initial", &format!("{prefix}1"))?,
        raw.or_zero("initial", &format!("{prefix}2"))?,
        raw.or_zero("initial", &format!("{prefix}3"))?,
    ])
}

fn any_of(raw: &Raw, keys: &[&str]) -> bool {
    keys.iter().any(|k| raw.has("initial", k))
}

fn initial(raw: &Raw, regime: RegimeName) -> Result<Initial, ConfigError> {
    let four = any_of(raw, &["q1", "q2", "q3", "q4", "qdot1", "qdot2", "qdot3", "qdot4"]);
    let three = any_of(raw, &["t", "r1", "r2", "r3", "v1", "v2", "v3"]);
    let direction = any_of(raw, &["e1", "e2", "e3"]);
    if four && (three || direction) {
        return Err(invalid(
            "initial",
            "mixes four-dimensional keys (q, qdot) with observer keys (t, r, v, e)",
        ));
    }
    if regime == RegimeName::Massless {
        if four {
            return Err(invalid("initial", "massless particles start from t, r and a direction e"));
        }
        if direction && any_of(raw, &["v1", "v2", "v3"]) {
            return Err(invalid("initial", "give either e or v, not both"));
        }
        let e = if direction { vector(raw, "e")? } else { vector(raw, "v")? };
        let n = vec3::norm(&e);
        if !(n > 0.0) {
            return Err(invalid("initial.e", "direction must be nonzero"));
        }
        return Ok(Initial::Massless {
            t: raw.or_zero("initial", "t")?,
            r: vector(raw, "r")?,
            e: vec3::scale(1.0 / n, &e),
        });
    }
    if direction {
        return Err(invalid("initial.e", "only massless particles take a direction"));
    }
    if four {
        if let Some(q4dot) = raw.number("initial", "qdot4")? {
            if q4dot <= 0.0 {
                return Err(invalid(
                    "initial.qdot4",
                    "only the branch qdot4 > 0 is supported; qdot4 is otherwise implied by the constraint",
                ));
            }
        }
        return Ok(Initial::FourD {
            q: [
                raw.or_zero("initial", "q1")?,
                raw.or_zero("initial", "q2")?,
                raw.or_zero("initial", "q3")?,
                raw.or_zero("initial", "q4")?,
            ],
            qdot: vector(raw, "qdot")?,
        });
    }
    Ok(Initial::ThreeD {
        t: raw.or_zero("initial", "t")?,
        r: vector(raw, "r")?,
        v: vector(raw, "v")?,
    })
}

/// Speed and domain checks for the chosen regime at the initial point.
fn check_initial(raw: &Raw, model: &Model, regime: RegimeName, init: &Initial) -> Result<(), ConfigError> {
    let c = model.c();
    let at = |q: &FourVector| {
        model
            .sample(q)
            .map(|s| s.mass_squared)
            .map_err(|e| invalid("fields", e.to_string()))
    };
    match *init {
        Initial::Massless { .. } => Ok(()),
        Initial::ThreeD { t, r, v } => {
            let speed = vec3::norm(&v);
            match regime {
                RegimeName::Massive if speed >= c => Err(invalid(
                    "initial.v",
                    format!("speed exceeds c for massive regime (|v| = {speed}, c = {c})"),
                )),
                RegimeName::Tachyon if speed <= c => Err(invalid(
                    "initial.v",
                    format!("speed below c for tachyon regime (|v| = {speed}, c = {c})"),
                )),
                _ => {
                    let m2 = at(&FourVector::from_parts(r, c * t))?;
                    let gap = 1.0 - speed * speed / (c * c);
                    if m2 == 0.0 || !(m2 / gap > 0.0) {
                        Err(invalid(
                            "initial.v",
                            format!("M = {m2} and 1 - v^2/c^2 = {gap} leave the constraint domain"),
                        ))
                    } else {
                        Ok(())
                    }
                }
            }
        }
        Initial::FourD { q, qdot } => {
            let m2 = at(&FourVector::new(q))?;
            if m2 == 0.0 {
                return Err(invalid("fields.M", "vanishes at the initial point"));
            }
            let h = normal_form(m2, &qdot, c).map_err(|e| {
                let reason = match regime {
                    RegimeName::Tachyon => format!("|qdot| must exceed m0 c for tachyon regime ({e})"),
                    _ => e.to_string(),
                };
                invalid("initial.qdot", reason)
            })?;
            if let Some(given) = raw.number("initial", "qdot4")? {
                if (given - h).abs() > 1e-9 * h.max(1.0) {
                    return Err(invalid(
                        "initial.qdot4",
                        format!("{given} does not satisfy the constraint (expected {h})"),
                    ));
                }
            }
            Ok(())
        }
    }
}

fn integrator(raw: &Raw, horizon: f64) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    if let Some(x) = raw.positive("integrator", "rtol")? {
        s.rtol = x;
    }
    if let Some(x) = raw.positive("integrator", "atol")? {
        s.atol = x;
    }
    s.h0 = raw.positive("integrator", "h0")?;
    s.fixed_step = raw.positive("integrator", "fixed_step")?;
    if let Some(x) = raw.positive("integrator", "max_steps")? {
        if x.fract() != 0.0 {
            return Err(invalid("integrator.max_steps", "must be an integer"));
        }
        s.max_steps = x as usize;
    }
    if let Some(dt) = raw.positive("integrator", "output_dt")? {
        if dt > horizon {
            return Err(invalid("integrator.output_dt", "exceeds the horizon"));
        }
        s.output = Output::Grid(dt);
    }
    Ok(s)
}

/// Parses configuration text. `name` is the default output name and `base`
/// the directory relative output paths are resolved against.
pub fn parse_config(text: &str, name: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let opt = ParseOption {
        enabled_escape: false,
        ..ParseOption::default()
    };
    let ini = Ini::load_from_str_opt(text, opt).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    check_keys(&ini)?;
    let raw = Raw { ini: &ini };

    let c = raw.positive("constants", "c")?.unwrap_or(1.0);
    let mut env = Env::new(c);
    let mut params = BTreeMap::new();
    if let Some(props) = ini.section(Some("params")) {
        for (key, value) in props.iter() {
            let path = format!("params.{key}");
            let valid = key.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
                && key.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !valid || RESERVED.contains(&key) {
                return Err(invalid(path, "not a usable parameter name"));
            }
            let x = value
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(&path, format!("`{value}` is not a finite number")))?;
            env = env.with_param(key, x);
            params.insert(key.to_owned(), x);
        }
    }

    let (regime, m0) = regime(&raw)?;
    let charge = raw.number("particle", "charge")?.unwrap_or(1.0);
    let psi_bar = raw.flag("particle", "psi_bar")?;
    let explicit_a = raw.number("particle", "scalar_charge")?;
    if psi_bar && explicit_a.is_some() {
        return Err(invalid("particle.psi_bar", "conflicts with an explicit scalar_charge"));
    }
    if psi_bar && m0.is_none() {
        return Err(invalid("particle.psi_bar", "needs a rest mass"));
    }
    let energy_src = raw.get("particle", "energy").map(str::to_owned);
    match (regime, &energy_src) {
        (RegimeName::Massless, _) => {}
        (_, Some(_)) => return Err(invalid("particle.energy", "only used by the massless regime")),
        _ => {}
    }

    let field = |key: &str| raw.get("fields", key).unwrap_or("0").to_owned();
    let uses_potentials = ["A1", "A2", "A3", "V"].iter().any(|k| raw.has("fields", k));
    let uses_phi = ["phi1", "phi2", "phi3", "phi4"].iter().any(|k| raw.has("fields", k));
    if uses_potentials && uses_phi {
        return Err(invalid("fields", "give either phi1..phi4 or A1..A3, V, not both"));
    }
    let source = if uses_potentials {
        FieldSource::Potentials {
            a: [field("A1"), field("A2"), field("A3")],
            v: field("V"),
        }
    } else {
        FieldSource::Phi {
            phi: [field("phi1"), field("phi2"), field("phi3"), field("phi4")],
        }
    };
    let mut fields = FieldSet::zero(env.clone());
    match &source {
        FieldSource::Phi { phi } => {
            for (k, src) in phi.iter().enumerate() {
                fields = fields.with_phi(k, compile(&format!("fields.phi{}", k + 1), src, &env)?);
            }
        }
        FieldSource::Potentials { a, v } => {
            if charge == 0.0 {
                return Err(invalid("particle.charge", "potentials need a nonzero charge"));
            }
            let a = [
                compile("fields.A1", &a[0], &env)?,
                compile("fields.A2", &a[1], &env)?,
                compile("fields.A3", &a[2], &env)?,
            ];
            fields = fields.with_potentials(a, compile("fields.V", v, &env)?, charge);
        }
    }
    let psi = field("psi");
    fields = fields.with_psi(compile("fields.psi", &psi, &env)?);
    let mass_squared = raw.get("fields", "M").map(str::to_owned);
    match (regime, &mass_squared) {
        (RegimeName::General, Some(src)) => {
            fields = fields.with_mass_squared(compile("fields.M", src, &env)?);
        }
        (RegimeName::General, None) => return Err(invalid("fields.M", "required for the general regime")),
        (_, Some(_)) => return Err(invalid("fields.M", "only used by the general regime")),
        _ => {}
    }

    let mut particle = match regime {
        RegimeName::Massive => ParticleSpec::massive(m0.unwrap_or(1.0), charge),
        RegimeName::Tachyon => ParticleSpec::tachyon(m0.unwrap_or(1.0), charge),
        RegimeName::General => ParticleSpec::general(charge),
        RegimeName::Massless => {
            let src = energy_src.as_deref().unwrap_or("1");
            ParticleSpec::massless(charge, compile("particle.energy", src, &env)?)
        }
    };
    if psi_bar {
        particle = particle.with_rest_mass_scalar_charge();
    } else if let Some(a) = explicit_a {
        particle = particle.with_scalar_charge(a);
    }
    let scalar_charge = particle.scalar_charge;
    let model = Model::new(fields, particle);

    let initial = initial(&raw, regime)?;
    check_initial(&raw, &model, regime, &initial)?;

    let horizon = raw
        .positive("run", "horizon")?
        .ok_or_else(|| invalid("run.horizon", "missing"))?;
    let parametrization = match (raw.get("run", "parametrization"), regime) {
        (Some("t"), _) | (None, RegimeName::Massless) => Parametrization::T,
        (Some("s"), RegimeName::Massless) => {
            return Err(invalid("run.parametrization", "massless motion is parametrized by t"))
        }
        (Some("s"), _) => Parametrization::S,
        (None, _) => match initial {
            Initial::FourD { .. } => Parametrization::S,
            _ => Parametrization::T,
        },
        (Some(other), _) => return Err(invalid("run.parametrization", format!("`{other}` is not s or t"))),
    };
    let form = match raw.get("run", "form") {
        None | Some("psi") => Form3::Psi,
        Some("dicke") => {
            if !matches!(regime, RegimeName::Massive | RegimeName::Tachyon) {
                return Err(invalid("run.form", "the rest-mass form needs a constant mass"));
            }
            if parametrization != Parametrization::T {
                return Err(invalid("run.form", "the rest-mass form is integrated in t"));
            }
            Form3::Dicke
        }
        Some(other) => return Err(invalid("run.form", format!("`{other}` is not psi or dicke"))),
    };

    let integrator = integrator(&raw, horizon)?;
    let dir = match raw.get("output", "dir") {
        Some(d) => base.join(d),
        None => base.to_path_buf(),
    };
    let output = OutputConfig {
        dir,
        name: raw.get("output", "name").unwrap_or(name).to_owned(),
    };

    Ok(RunConfig {
        particle: ParticleConfig {
            regime,
            m0,
            charge,
            scalar_charge,
            psi_bar,
            energy: energy_src,
        },
        c,
        params,
        fields: source,
        psi,
        mass_squared,
        initial,
        horizon,
        parametrization,
        form,
        integrator,
        output,
        verify: false,
        model,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, name, base)
}
