//! Flat `key = value` configuration files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use entforge::experiments::{linear_grid, log_grid, Realizations};
use serde::Serialize;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "ENTFORGE_SEED";

pub const KNOWN_KEYS: &[&str] = &[
    "nq",
    "k_param",
    "steps",
    "eps_grid",
    "realizations",
    "seed",
    "workers",
    "out",
    "strict",
    "haar_samples",
    "initial_level",
    "batches",
    "refine",
    "fraction",
    "allow_large",
];

#[derive(Debug, PartialEq)]
pub enum ConfigError {
    Io(String),
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    Duplicate(String),
    Value { key: String, value: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected `key = value`, got `{text}`"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::Duplicate(k) => write!(f, "key `{k}` given twice"),
            ConfigError::Value { key, value, reason } => write!(f, "bad value `{value}` for {key}: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value { key: key.into(), value: value.into(), reason: reason.to_string() }
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.into() })?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { line: i + 1, key: k.into() });
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate(k.into()));
        }
    }
    Ok(map)
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_kv(&text)
}

/// `lo:hi:log:count`, `lo:hi:lin:count`, or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, ConfigError> {
    let err = |r: String| bad("eps_grid", s, r);
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [lo, hi, kind, count] => {
            let lo: f64 = lo.parse().map_err(|e| err(format!("{e}")))?;
            let hi: f64 = hi.parse().map_err(|e| err(format!("{e}")))?;
            let count: usize = count.parse().map_err(|e| err(format!("{e}")))?;
            match *kind {
                "log" => log_grid(lo, hi, count),
                "lin" => linear_grid(lo, hi, count),
                other => return Err(err(format!("spacing `{other}` is neither log nor lin"))),
            }
            .map_err(|e| err(e.to_string()))?
        }
        [list] => list
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| err(format!("{e}"))))
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(err("expected lo:hi:log|lin:count or a list".into())),
    };
    entforge::experiments::check_grid(&grid).map_err(|e| err(e.to_string()))?;
    Ok(grid)
}

pub fn parse_qubits(s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| bad("nq", s, e)))
        .collect()
}

pub fn parse_realizations(s: &str) -> Result<Realizations, ConfigError> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Realizations::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) => Err(bad("realizations", s, "must be positive")),
        Ok(n) => Ok(Realizations::Fixed(n)),
        Err(e) => Err(bad("realizations", s, e)),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool, ConfigError> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, s, "expected true or false")),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    s.parse().map_err(|e| bad(key, s, e))
}

/// Every setting that may come from a file or a flag; `None` means unset.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Settings {
    pub nq: Option<Vec<usize>>,
    pub k_param: Option<f64>,
    pub steps: Option<usize>,
    pub eps_grid: Option<Vec<f64>>,
    pub realizations: Option<Realizations>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub strict: Option<bool>,
    pub haar_samples: Option<usize>,
    pub initial_level: Option<i64>,
    pub batches: Option<usize>,
    pub refine: Option<bool>,
    pub fraction: Option<f64>,
    pub allow_large: Option<bool>,
}

impl Settings {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (k, v) in map {
            match k.as_str() {
                "nq" => s.nq = Some(parse_qubits(v)?),
                "k_param" => s.k_param = Some(parse_num(k, v)?),
                "steps" => s.steps = Some(parse_num(k, v)?),
                "eps_grid" => s.eps_grid = Some(parse_grid(v)?),
                "realizations" => s.realizations = Some(parse_realizations(v)?),
                "seed" => s.seed = Some(parse_num(k, v)?),
                "workers" => s.workers = Some(parse_num(k, v)?),
                "out" => s.out = Some(PathBuf::from(v)),
                "strict" => s.strict = Some(parse_bool(k, v)?),
                "haar_samples" => s.haar_samples = Some(parse_num(k, v)?),
                "initial_level" => s.initial_level = Some(parse_num(k, v)?),
                "batches" => s.batches = Some(parse_num(k, v)?),
                "refine" => s.refine = Some(parse_bool(k, v)?),
                "fraction" => s.fraction = Some(parse_num(k, v)?),
                "allow_large" => s.allow_large = Some(parse_bool(k, v)?),
                other => unreachable!("key {other} passed the filter"),
            }
        }
        Ok(s)
    }

    /// Overlays `flags` on `self`. Returns one warning per key set in both
    /// with different values; the flag wins.
    pub fn overlay(self, flags: Settings) -> (Settings, Vec<String>) {
        let mut warnings = Vec::new();
        macro_rules! pick {
            ($($field:ident),*) => {
                Settings {
                    $($field: match (self.$field, flags.$field) {
                        (Some(file), Some(flag)) => {
                            if file != flag {
                                warnings.push(format!(
                                    "{}: flag value {:?} overrides config value {:?}",
                                    stringify!($field), flag, file
                                ));
                            }
                            Some(flag)
                        }
                        (file, flag) => flag.or(file),
                    },)*
                }
            };
        }
        let merged = pick!(
            nq, k_param, steps, eps_grid, realizations, seed, workers, out, strict, haar_samples,
            initial_level, batches, refine, fraction, allow_large
        );
        (merged, warnings)
    }
}

/// Seed from settings, then `ENTFORGE_SEED`, then 0.
pub fn resolve_seed(explicit: Option<u64>, env: Option<&str>) -> Result<u64, ConfigError> {
    match (explicit, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v.trim().parse().map_err(|e| bad(SEED_ENV, v, e)),
        (None, None) => Ok(0),
    }
}
