//! Plain-text run configuration: one `key = value` per line, `#` comments,
//! comma-separated lists.
//!
//! ```text
//! domain = 0, 10
//! n_elements = 20
//! L = 1
//! C = 0.01
//! signal = sine_pulse
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use phdisc_core::{
    build_mesh, build_uniform_mesh, quadratic_density, quartic_density, Domain, EnergyDensity, Integrator, Mesh, Signal,
};
use thiserror::Error;

pub const KEYS: &[&str] = &[
    "domain",
    "n_elements",
    "breakpoints",
    "sigma",
    "L",
    "C",
    "density_p",
    "density_q",
    "signal",
    "signal_left",
    "signal_right",
    "integrator",
    "dt",
    "t_end",
    "quad_order",
    "threshold",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    Malformed { line: usize, key: String, reason: String },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    Uniform(usize),
    Breakpoints(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Quadratic(f64),
    Quartic(f64),
}

impl DensitySpec {
    pub fn build(&self) -> phdisc_core::Result<EnergyDensity> {
        match *self {
            DensitySpec::Quadratic(c) => quadratic_density(c),
            DensitySpec::Quartic(k) => quartic_density(k),
        }
    }

    fn render(&self, name: &str) -> String {
        match self {
            DensitySpec::Quadratic(c) => format!("quadratic:{name}={c}"),
            DensitySpec::Quartic(k) => format!("quartic:k={k}"),
        }
    }
}

impl FromStr for DensitySpec {
    type Err = String;

    /// `quadratic:L=1`, `quadratic:0.5`, `quartic:k=2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, param) = s
            .split_once(':')
            .ok_or("expected `quadratic:<coef>` or `quartic:k=<k>`")?;
        let value = param.rsplit_once('=').map_or(param, |(_, v)| v).trim();
        let value: f64 = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
        let spec = match kind.trim() {
            "quadratic" => DensitySpec::Quadratic(value),
            "quartic" => DensitySpec::Quartic(value),
            other => return Err(format!("unknown density `{other}`")),
        };
        if !(value.is_finite() && value > 0.0) {
            return Err("coefficient must be positive".into());
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSpec {
    Zero,
    Constant(f64),
    SinePulse { amplitude: f64, duration: f64 },
}

impl SignalSpec {
    pub fn build(&self) -> Signal {
        match *self {
            SignalSpec::Zero => Signal::Zero,
            SignalSpec::Constant(c) => Signal::Constant(c),
            SignalSpec::SinePulse { amplitude, duration } => Signal::SinePulse { amplitude, duration },
        }
    }
}

impl fmt::Display for SignalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSpec::Zero => write!(f, "zero"),
            SignalSpec::Constant(c) => write!(f, "constant:value={c}"),
            SignalSpec::SinePulse { amplitude, duration } => {
                write!(f, "sine_pulse:amplitude={amplitude};duration={duration}")
            }
        }
    }
}

impl FromStr for SignalSpec {
    type Err = String;

    /// `zero`, `constant:value=2`, `sine_pulse`, `sine_pulse:amplitude=1;duration=2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, params) = s.split_once(':').unwrap_or((s, ""));
        let mut named = Vec::new();
        for p in params.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got `{p}`"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a number", v.trim()))?;
            if !v.is_finite() {
                return Err(format!("`{}` must be finite", k.trim()));
            }
            named.push((k.trim().to_string(), v));
        }
        let take = |name: &str, default: Option<f64>| -> Result<f64, String> {
            named
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or(format!("missing `{name}`"))
        };
        let allow = |names: &[&str]| -> Result<(), String> {
            match named.iter().find(|(k, _)| !names.contains(&k.as_str())) {
                Some((k, _)) => Err(format!("unknown parameter `{k}`")),
                None => Ok(()),
            }
        };
        match kind.trim() {
            "zero" => {
                allow(&[])?;
                Ok(SignalSpec::Zero)
            }
            "constant" => {
                allow(&["value"])?;
                Ok(SignalSpec::Constant(take("value", None)?))
            }
            "sine_pulse" => {
                allow(&["amplitude", "duration"])?;
                let duration = take("duration", Some(2.0))?;
                if duration <= 0.0 {
                    return Err("duration must be positive".into());
                }
                Ok(SignalSpec::SinePulse {
                    amplitude: take("amplitude", Some(1.0))?,
                    duration,
                })
            }
            other => Err(format!("unknown signal `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: (f64, f64),
    pub mesh: MeshSpec,
    /// One value for every element, or one per element.
    pub sigma: Vec<f64>,
    pub density_p: Option<DensitySpec>,
    pub density_q: Option<DensitySpec>,
    pub signal_left: SignalSpec,
    pub signal_right: SignalSpec,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub quad_order: usize,
    pub threshold: f64,
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Defaults for everything except the domain and mesh.
    pub fn new(domain: (f64, f64), mesh: MeshSpec) -> Self {
        Self {
            domain,
            mesh,
            sigma: vec![0.0],
            density_p: None,
            density_q: None,
            signal_left: SignalSpec::Zero,
            signal_right: SignalSpec::Zero,
            integrator: Integrator::ImplicitMidpoint,
            dt: 1e-3,
            t_end: 10.0,
            quad_order: 5,
            threshold: 1e-12,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn build_mesh(&self) -> phdisc_core::Result<Mesh> {
        let domain = Domain::new(self.domain.0, self.domain.1)?;
        match &self.mesh {
            MeshSpec::Uniform(n) => build_uniform_mesh(domain, *n),
            MeshSpec::Breakpoints(z) => build_mesh(domain, z.clone()),
        }
    }

    pub fn n_elements(&self) -> usize {
        match &self.mesh {
            MeshSpec::Uniform(n) => *n,
            MeshSpec::Breakpoints(z) => z.len().saturating_sub(1),
        }
    }

    /// Check cross-field constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = self.build_mesh() {
            return invalid(e.to_string());
        }
        let n = self.n_elements();
        if self.sigma.len() != 1 && self.sigma.len() != n {
            return invalid(format!("sigma needs 1 or {n} values, got {}", self.sigma.len()));
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return invalid("sigma must be finite and nonnegative".into());
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return invalid("dt must be positive".into());
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return invalid("t_end must be at least dt".into());
        }
        if self.quad_order == 0 {
            return invalid("quad_order must be at least 1".into());
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return invalid("threshold must be positive".into());
        }
        Ok(())
    }

    /// Text that [`parse_config`] maps back to `self`.
    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        out.push_str(&format!("domain = {}, {}\n", self.domain.0, self.domain.1));
        match &self.mesh {
            MeshSpec::Uniform(n) => out.push_str(&format!("n_elements = {n}\n")),
            MeshSpec::Breakpoints(z) => out.push_str(&format!("breakpoints = {}\n", list(z))),
        }
        out.push_str(&format!("sigma = {}\n", list(&self.sigma)));
        if let Some(d) = &self.density_p {
            out.push_str(&format!("density_p = {}\n", d.render("L")));
        }
        if let Some(d) = &self.density_q {
            out.push_str(&format!("density_q = {}\n", d.render("C")));
        }
        out.push_str(&format!("signal_left = {}\n", self.signal_left));
        out.push_str(&format!("signal_right = {}\n", self.signal_right));
        out.push_str(&format!("integrator = {}\n", self.integrator.name()));
        out.push_str(&format!("dt = {}\n", self.dt));
        out.push_str(&format!("t_end = {}\n", self.t_end));
        out.push_str(&format!("quad_order = {}\n", self.quad_order));
        out.push_str(&format!("threshold = {}\n", self.threshold));
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        out
    }
}

fn number(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value.trim().parse().map_err(|_| ConfigError::Malformed {
        line,
        key: key.into(),
        reason: format!("`{}` is not a number", value.trim()),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Malformed {
            line,
            key: key.into(),
            reason: "must be finite".into(),
        })
    }
}

fn numbers(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| number(line, key, v)).collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut seen: Vec<(&str, usize)> = Vec::new();
    let mut domain = None;
    let mut mesh = None;
    let mut cfg = RunConfig::new((0.0, 1.0), MeshSpec::Uniform(1));

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, key: key.into() })?;
        // `L` and `density_p` (and `C`/`density_q`, `signal`/`signal_left`) name the same field
        let slot = match key {
            "L" => "density_p",
            "C" => "density_q",
            "signal" => "signal_left",
            "breakpoints" => "n_elements",
            k => k,
        };
        if seen.iter().any(|(k, _)| *k == slot) {
            return Err(ConfigError::Duplicate { line, key: key.into() });
        }
        seen.push((slot, line));
        let malformed = |reason: String| ConfigError::Malformed {
            line,
            key: key.into(),
            reason,
        };

        match key {
            "domain" => {
                let v = numbers(line, key, value)?;
                if v.len() != 2 || v[0] >= v[1] {
                    return Err(malformed("expected `start, end` with start < end".into()));
                }
                domain = Some((v[0], v[1]));
            }
            "n_elements" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| malformed("expected a positive integer".into()))?;
                if n == 0 {
                    return Err(malformed("expected a positive integer".into()));
                }
                mesh = Some(MeshSpec::Uniform(n));
            }
            "breakpoints" => {
                let z = numbers(line, key, value)?;
                if z.len() < 2 || z.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(malformed("need at least two strictly increasing values".into()));
                }
                mesh = Some(MeshSpec::Breakpoints(z));
            }
            "sigma" => {
                let s = numbers(line, key, value)?;
                if s.iter().any(|v| *v < 0.0) {
                    return Err(malformed("must be nonnegative".into()));
                }
                cfg.sigma = s;
            }
            "L" | "C" => {
                let v = number(line, key, value)?;
                if v <= 0.0 {
                    return Err(malformed("must be positive".into()));
                }
                let spec = Some(DensitySpec::Quadratic(v));
                if key == "L" {
                    cfg.density_p = spec;
                } else {
                    cfg.density_q = spec;
                }
            }
            "density_p" => cfg.density_p = Some(value.parse().map_err(malformed)?),
            "density_q" => cfg.density_q = Some(value.parse().map_err(malformed)?),
            "signal" | "signal_left" => cfg.signal_left = value.parse().map_err(malformed)?,
            "signal_right" => cfg.signal_right = value.parse().map_err(malformed)?,
            "integrator" => {
                cfg.integrator = value
                    .parse()
                    .map_err(|_| malformed("expected `rk4` or `implicit-midpoint`".into()))?
            }
            "dt" | "t_end" | "threshold" => {
                let v = number(line, key, value)?;
                if v <= 0.0 {
                    return Err(malformed("must be positive".into()));
                }
                match key {
                    "dt" => cfg.dt = v,
                    "t_end" => cfg.t_end = v,
                    _ => cfg.threshold = v,
                }
            }
            "quad_order" => {
                cfg.quad_order = value
                    .parse()
                    .ok()
                    .filter(|q| *q >= 1)
                    .ok_or_else(|| malformed("expected an integer >= 1".into()))?
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err(malformed("empty path".into()));
                }
                cfg.out_dir = PathBuf::from(value);
            }
            _ => unreachable!("key list and match arms disagree"),
        }
    }

    let mut missing = Vec::new();
    if domain.is_none() {
        missing.push("domain".to_string());
    }
    if mesh.is_none() {
        missing.push("n_elements (or breakpoints)".to_string());
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    cfg.domain = domain.unwrap();
    cfg.mesh = mesh.unwrap();
    cfg.validate()?;
    Ok(cfg)
}
