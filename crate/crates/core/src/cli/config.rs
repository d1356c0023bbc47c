use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::classify::RMaxPolicy;
use crate::error::{Error, Result};
use crate::integrate::StepControls;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("format must be csv or json, got {other:?}")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Everything a run depends on, after defaults, the config file and flags
/// have been merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub dim: u32,
    pub p: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub tol: f64,
    pub r_max_initial: f64,
    pub r_max_cap: f64,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = StepControls::default();
        let policy = RMaxPolicy::default();
        Self {
            dim: 3,
            p: 2.0,
            rtol: c.rtol,
            atol: c.atol,
            h_init: c.h_init,
            h_max: c.h_max,
            max_steps: c.max_steps,
            tol: 1e-10,
            r_max_initial: policy.initial,
            r_max_cap: policy.cap,
            format: None,
            output: None,
            seed: 0,
            samples: 2001,
        }
    }
}

/// Optional values layered over a [`RunConfig`]; `None` leaves a field alone.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// Spatial dimension N (at least 2)
    #[arg(long, global = true)]
    pub dim: Option<u32>,
    /// Exponent p in [1, 2]
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub h_init: Option<f64>,
    #[arg(long, global = true)]
    pub h_max: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Bisection width tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// First integration radius tried by the classifier
    #[arg(long, global = true)]
    pub r_max_initial: Option<f64>,
    /// Largest integration radius tried by the classifier
    #[arg(long, global = true)]
    pub r_max_cap: Option<f64>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Output file (stdout if absent)
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Seed for randomly drawn height pairs
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of trajectory samples written by solve
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        set!(dim, p, rtol, atol, h_init, h_max, max_steps, tol, r_max_initial, r_max_cap, seed, samples);
        if o.format.is_some() {
            self.format = o.format;
        }
        if o.output.is_some() {
            self.output = o.output.clone();
        }
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(self.dim, self.p)
    }

    pub fn controls(&self) -> StepControls {
        StepControls {
            rtol: self.rtol,
            atol: self.atol,
            h_init: self.h_init,
            h_max: self.h_max,
            max_steps: self.max_steps,
        }
    }

    pub fn policy(&self) -> RMaxPolicy {
        RMaxPolicy { initial: self.r_max_initial, cap: self.r_max_cap }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.controls().validate()?;
        self.policy().validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParams(format!("samples must be at least 2, got {}", self.samples)));
        }
        Ok(())
    }

    /// `key = value` lines in the config-file syntax, one per field.
    /// Floats are written in their shortest round-tripping form.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("dim", self.dim.to_string());
        kv("p", float(self.p));
        kv("rtol", float(self.rtol));
        kv("atol", float(self.atol));
        kv("h_init", float(self.h_init));
        kv("h_max", float(self.h_max));
        kv("max_steps", self.max_steps.to_string());
        kv("tol", float(self.tol));
        kv("r_max_initial", float(self.r_max_initial));
        kv("r_max_cap", float(self.r_max_cap));
        if let Some(f) = self.format {
            kv("format", f.to_string());
        }
        if let Some(o) = &self.output {
            kv("output", o.display().to_string());
        }
        kv("seed", self.seed.to_string());
        kv("samples", self.samples.to_string());
        s
    }
}

fn float(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| format!("bad value {raw:?} for {key}: {e}"))
}

/// Parses `key = value` lines into overrides. Blank lines and text after
/// `#` are ignored; unknown keys and unparsable values are errors.
pub fn parse_config(text: &str, path: &str) -> std::result::Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Parse { path: path.to_string(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "dim" => o.dim = Some(parse_value(key, value).map_err(err)?),
            "p" => o.p = Some(parse_value(key, value).map_err(err)?),
            "rtol" => o.rtol = Some(parse_value(key, value).map_err(err)?),
            "atol" => o.atol = Some(parse_value(key, value).map_err(err)?),
            "h_init" => o.h_init = Some(parse_value(key, value).map_err(err)?),
            "h_max" => o.h_max = Some(parse_value(key, value).map_err(err)?),
            "max_steps" => o.max_steps = Some(parse_value(key, value).map_err(err)?),
            "tol" => o.tol = Some(parse_value(key, value).map_err(err)?),
            "r_max_initial" => o.r_max_initial = Some(parse_value(key, value).map_err(err)?),
            "r_max_cap" => o.r_max_cap = Some(parse_value(key, value).map_err(err)?),
            "format" => o.format = Some(parse_value(key, value).map_err(err)?),
            "output" => o.output = Some(PathBuf::from(value)),
            "seed" => o.seed = Some(parse_value(key, value).map_err(err)?),
            "samples" => o.samples = Some(parse_value(key, value).map_err(err)?),
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    Ok(o)
}

pub fn load_config(path: &Path) -> std::result::Result<Overrides, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: name.clone(), source })?;
    parse_config(&text, &name)
}

/// Defaults, then the config file, then flags.
pub fn resolve(file: Option<&Path>, flags: &Overrides) -> std::result::Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        cfg.apply(&load_config(path)?);
    }
    cfg.apply(flags);
    Ok(cfg)
}
