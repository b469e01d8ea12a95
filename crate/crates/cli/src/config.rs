//! Run configuration: a flat `key = value` file merged with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ddr_plates::solver::{Material, SolutionKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Solve,
    Convergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub meshes: Vec<String>,
    /// Degree `ℓ` of `Σ_h^ℓ`; verification runs on `V_T^k` with `k = ℓ + 1`.
    pub l: usize,
    pub material: Material,
    pub solution: SolutionKind,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    /// Certificate tolerance.
    pub tol: f64,
    /// Bound on the identity-suite residuals.
    pub identity_tol: f64,
    /// Allowed shortfall of the fitted slope below `ℓ + 1`.
    pub rate_tolerance: f64,
    pub parallel: bool,
    pub timing: bool,
    pub check_exactness: bool,
    /// Test hook: corrupt the local uCsym matrix before certification.
    pub inject_fault: bool,
}

pub const KEYS: &[&str] = &[
    "mesh",
    "degree",
    "k",
    "D",
    "nu",
    "solution",
    "out",
    "seed",
    "samples",
    "tol",
    "identity_tol",
    "rate_tolerance",
    "parallel",
    "timing",
    "check_exactness",
    "inject_fault",
];

/// Parses `key = value` lines; `#` starts a comment. Repeated `mesh` keys accumulate.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config(format!("config line {}: expected 'key = value'", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        let entry = map.entry(k.to_string()).or_default();
        if k == "mesh" {
            entry.extend(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
        } else {
            *entry = vec![v.to_string()];
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, Vec<String>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Command-line values; `None` falls back to the config file, then to the default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub meshes: Vec<String>,
    pub degree: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<f64>,
    pub nu: Option<f64>,
    pub solution: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub identity_tol: Option<f64>,
    pub rate_tolerance: Option<f64>,
    pub parallel: bool,
    pub timing: bool,
    pub check_exactness: bool,
    pub inject_fault: bool,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("invalid value '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean '{v}' for {key}"))),
    }
}

impl RunConfig {
    pub fn build(command: Command, file: &BTreeMap<String, Vec<String>>, o: Overrides) -> Result<Self, CliError> {
        let get = |k: &str| file.get(k).and_then(|v| v.first()).map(String::as_str);
        fn pick<T: FromStr>(flag: Option<T>, file: Option<&str>, key: &str) -> Result<Option<T>, CliError> {
            match flag {
                Some(v) => Ok(Some(v)),
                None => file.map(|v| parse_value(key, v)).transpose(),
            }
        }
        let flag_or_file = |flag: bool, key: &str| -> Result<bool, CliError> { Ok(flag || get(key).map(|v| parse_bool(key, v)).transpose()?.unwrap_or(false)) };

        let meshes = if o.meshes.is_empty() { file.get("mesh").cloned().unwrap_or_default() } else { o.meshes };
        if meshes.is_empty() {
            return Err(CliError::Config("no mesh given (use --mesh or 'mesh = ...')".into()));
        }
        let degree: Option<usize> = pick(o.degree, get("degree"), "degree")?;
        let k: Option<usize> = pick(o.k, get("k"), "k")?;
        let l = match (degree, k) {
            (Some(l), Some(k)) if k != l + 1 => return Err(CliError::Config(format!("degree {l} and k {k} disagree (k must be degree + 1)"))),
            (Some(l), _) => l,
            (None, Some(k)) => k.checked_sub(1).ok_or_else(|| CliError::Config("k must be at least 3".into()))?,
            (None, None) => return Err(CliError::Config("no degree given (use --degree or --k)".into())),
        };
        if l < 2 {
            return Err(CliError::Config(format!("degree {l} is below 2 (k below 3)")));
        }
        if command == Command::Convergence && meshes.len() < 3 {
            return Err(CliError::Config(format!("a convergence study needs at least 3 meshes, got {}", meshes.len())));
        }
        if command == Command::Solve && meshes.len() != 1 {
            return Err(CliError::Config(format!("solve takes exactly one mesh, got {}", meshes.len())));
        }
        let d = pick(o.d, get("D"), "D")?.unwrap_or(1.0);
        let nu = pick(o.nu, get("nu"), "nu")?.unwrap_or(0.0);
        let material = Material::new(d, nu).map_err(|e| CliError::Config(e.to_string()))?;
        let solution_name = o.solution.or_else(|| get("solution").map(str::to_string)).unwrap_or_else(|| "trig".into());
        let solution: SolutionKind = solution_name.parse().map_err(|e: ddr_plates::Error| CliError::Config(e.to_string()))?;
        let positive = |v: f64, key: &str| if v > 0.0 && v.is_finite() { Ok(v) } else { Err(CliError::Config(format!("{key} must be positive"))) };
        Ok(Self {
            command,
            meshes,
            l,
            material,
            solution,
            out: o.out.or_else(|| get("out").map(PathBuf::from)),
            seed: pick(o.seed, get("seed"), "seed")?.unwrap_or(20240601),
            samples: pick(o.samples, get("samples"), "samples")?.unwrap_or(20),
            tol: positive(pick(o.tol, get("tol"), "tol")?.unwrap_or(1e-9), "tol")?,
            identity_tol: positive(pick(o.identity_tol, get("identity_tol"), "identity_tol")?.unwrap_or(1e-10), "identity_tol")?,
            rate_tolerance: pick(o.rate_tolerance, get("rate_tolerance"), "rate_tolerance")?.unwrap_or(0.25),
            parallel: flag_or_file(o.parallel, "parallel")?,
            timing: flag_or_file(o.timing, "timing")?,
            check_exactness: flag_or_file(o.check_exactness, "check_exactness")?,
            inject_fault: flag_or_file(o.inject_fault, "inject_fault")?,
        })
    }
}
