//! Study configuration: a plain `key = value` file with command-line
//! overrides. Keys accept `-` or `_` interchangeably.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hpdg_core::{DegreeRounding, Nonlinearity, Potential};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError { key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialSign {
    Attractive,
    Repulsive,
    None,
}

impl FromStr for PotentialSign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "attractive" | "-" | "-1" => Ok(PotentialSign::Attractive),
            "repulsive" | "+" | "1" | "+1" => Ok(PotentialSign::Repulsive),
            "none" | "0" => Ok(PotentialSign::None),
            other => Err(format!("expected attractive, repulsive or none, got {other:?}")),
        }
    }
}

impl fmt::Display for PotentialSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialSign::Attractive => "attractive",
            PotentialSign::Repulsive => "repulsive",
            PotentialSign::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub dim: usize,
    pub sigma: f64,
    /// First level of the sweep.
    pub ell_min: usize,
    /// Last level of the sweep.
    pub levels: usize,
    pub p0: usize,
    pub slope: f64,
    pub alpha: f64,
    pub pot_sign: PotentialSign,
    pub nonlinearity: Nonlinearity,
    pub penalty: f64,
    /// Nonlinear tolerance; `1e-10` in 2D and `1e-7` in 3D when absent.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub theta: f64,
    pub ref_extra_levels: usize,
    pub ref_extra_degree: usize,
    pub rounding: DegreeRounding,
    pub out: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            dim: 2,
            sigma: 0.5,
            ell_min: 1,
            levels: 5,
            p0: 2,
            slope: 0.125,
            alpha: 1.0,
            pot_sign: PotentialSign::Attractive,
            nonlinearity: Nonlinearity::Power(3),
            penalty: 10.0,
            tol: None,
            max_iter: 100,
            theta: 1.0,
            ref_extra_levels: 2,
            ref_extra_degree: 1,
            rounding: DegreeRounding::HalfUp,
            out: PathBuf::from("study-out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::new(key, format!("cannot parse {value:?}: {e}")))
}

/// `a/b` or a plain float.
fn parse_ratio(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    if let Some((a, b)) = v.split_once('/') {
        let a: f64 = parse(key, a)?;
        let b: f64 = parse(key, b)?;
        return Ok(a / b);
    }
    parse(key, v)
}

pub fn parse_nonlinearity(value: &str) -> Result<Nonlinearity, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "linear" | "none" => Ok(Nonlinearity::Linear),
        v => v
            .parse::<u32>()
            .map(Nonlinearity::Power)
            .map_err(|_| format!("expected 2, 3, 4 or linear, got {value:?}")),
    }
}

pub fn parse_rounding(value: &str) -> Result<DegreeRounding, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "half-up" | "half_up" | "round" => Ok(DegreeRounding::HalfUp),
        "floor" => Ok(DegreeRounding::Floor),
        "ceil" => Ok(DegreeRounding::Ceil),
        _ => Err(format!("expected half-up, floor or ceil, got {value:?}")),
    }
}

pub fn canonical_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

impl StudyConfig {
    /// Parses a `key = value` file on top of the defaults. `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = StudyConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, format!("line {} is not `key = value`", lineno + 1)))?;
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = canonical_key(key);
        let k = k.as_str();
        match k {
            "dim" | "d" => self.dim = parse(k, value)?,
            "sigma" => self.sigma = parse_ratio(k, value)?,
            "ell_min" | "min_level" => self.ell_min = parse(k, value)?,
            "levels" | "ell_max" => self.levels = parse(k, value)?,
            "p0" => self.p0 = parse(k, value)?,
            "slope" => self.slope = parse_ratio(k, value)?,
            "alpha" => self.alpha = parse_ratio(k, value)?,
            "pot_sign" => self.pot_sign = value.parse().map_err(|e: String| ConfigError::new(k, e))?,
            "delta" => self.nonlinearity = parse_nonlinearity(value).map_err(|e| ConfigError::new(k, e))?,
            "penalty" | "alpha0" => self.penalty = parse(k, value)?,
            "tol" => self.tol = Some(parse(k, value)?),
            "max_iter" => self.max_iter = parse(k, value)?,
            "theta" => self.theta = parse(k, value)?,
            "ref_extra_levels" => self.ref_extra_levels = parse(k, value)?,
            "ref_extra_degree" => self.ref_extra_degree = parse(k, value)?,
            "rounding" => self.rounding = parse_rounding(value).map_err(|e| ConfigError::new(k, e))?,
            "out" => self.out = PathBuf::from(value.trim()),
            _ => return Err(ConfigError::new(k, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |k: &str, m: &str| Err(ConfigError::new(k, m));
        if !(self.dim == 2 || self.dim == 3) {
            return bad("dim", "must be 2 or 3");
        }
        if !(self.sigma > 0.0 && self.sigma <= 0.5) {
            return bad("sigma", "must lie in (0, 1/2]");
        }
        if self.ell_min < 1 {
            return bad("ell_min", "must be at least 1");
        }
        if self.levels < self.ell_min {
            return bad("levels", "must be at least ell_min");
        }
        if self.p0 < 1 {
            return bad("p0", "must be at least 1");
        }
        if !(self.slope >= 0.0 && self.slope.is_finite()) {
            return bad("slope", "must be finite and nonnegative");
        }
        if !(self.alpha >= 0.0 && self.alpha < 2.0) {
            return bad("alpha", "must lie in [0, 2)");
        }
        if let Nonlinearity::Power(d) = self.nonlinearity {
            if !(2..=4).contains(&d) {
                return bad("delta", "must be 2, 3, 4 or linear");
            }
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return bad("penalty", "must be positive");
        }
        if let Some(t) = self.tol {
            if t.is_nan() || t <= 0.0 {
                return bad("tol", "must be positive");
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta", "must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(if self.dim == 3 { 1e-7 } else { 1e-10 })
    }

    pub fn potential(&self) -> Potential {
        match self.pot_sign {
            PotentialSign::Attractive => Potential::attractive(self.alpha),
            PotentialSign::Repulsive => Potential::repulsive(self.alpha),
            PotentialSign::None => Potential::zero(),
        }
    }

    pub fn reference_level(&self) -> usize {
        self.levels + self.ref_extra_levels
    }

    pub fn reference_degree(&self) -> usize {
        self.p0 + self.ref_extra_degree
    }

    /// Canonical `key = value` rendering, readable by [`StudyConfig::from_kv_str`].
    pub fn to_kv_string(&self) -> String {
        let delta = match self.nonlinearity {
            Nonlinearity::Linear => "linear".to_string(),
            Nonlinearity::Power(d) => d.to_string(),
        };
        let rounding = match self.rounding {
            DegreeRounding::HalfUp => "half-up",
            DegreeRounding::Floor => "floor",
            DegreeRounding::Ceil => "ceil",
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("dim", self.dim.to_string());
        kv("sigma", format!("{}", self.sigma));
        kv("ell_min", self.ell_min.to_string());
        kv("levels", self.levels.to_string());
        kv("p0", self.p0.to_string());
        kv("slope", format!("{}", self.slope));
        kv("alpha", format!("{}", self.alpha));
        kv("pot_sign", self.pot_sign.to_string());
        kv("delta", delta);
        kv("penalty", format!("{}", self.penalty));
        kv("tol", format!("{:e}", self.tolerance()));
        kv("max_iter", self.max_iter.to_string());
        kv("theta", format!("{}", self.theta));
        kv("ref_extra_levels", self.ref_extra_levels.to_string());
        kv("ref_extra_degree", self.ref_extra_degree.to_string());
        kv("rounding", rounding.to_string());
        kv("out", self.out.display().to_string());
        s
    }
}
