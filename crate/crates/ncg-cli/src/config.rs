//! Run configuration: grid, quadrature, χ support, tolerances, groups,
//! and the suite list. Defaults are compiled in so `verify all` needs no
//! flags; a TOML-style key-value file can override them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ncg_core::util::fnv1a;

pub const ALL_SUITES: [&str; 10] = [
    "clifford",
    "chi",
    "sigma-decay",
    "dirac-lemmas",
    "takai",
    "theta-j",
    "star-product",
    "crossed-g",
    "rg-index",
    "hp-dims",
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid_l: f64,
    pub grid_h: f64,
    pub epsilons: Vec<f64>,
    pub richardson_order: usize,
    pub chi_sigma: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub groups: Vec<usize>,
    pub suites: Vec<String>,
    /// Number of resolutions in the refinement studies (2..=4).
    pub refine: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut tolerances = BTreeMap::new();
        for (k, v) in [
            ("wave_oracle", 1e-10),
            ("chi_tail_weighted", 10.0),
            ("sigma_decay_threshold", 4.0),
            ("kernel_decay_threshold", 4.0),
            ("d_invariance", 1e-6),
            ("star_phase", 1e-4),
            ("theta_identity", 1e-8),
            ("theta_defect", 1e-3),
            ("takai_defect", 1e-3),
            ("refinement_ratio", 1.8),
            ("stabilization", 1e-12),
            ("cocycle", 1e-12),
        ] {
            tolerances.insert(k.to_string(), v);
        }
        RunConfig {
            grid_l: 8.0,
            grid_h: 0.25,
            epsilons: vec![0.2, 0.1, 0.05],
            richardson_order: 2,
            chi_sigma: ncg_core::symbol::DEFAULT_SIGMA,
            tolerances,
            groups: vec![2, 3, 4, 6],
            suites: ALL_SUITES.iter().map(|s| s.to_string()).collect(),
            refine: 3,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    UnknownSuite(String),
    NonPositiveTolerance(String, f64),
    Parse(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::UnknownSuite(s) => write!(f, "unknown suite: {s}"),
            ConfigError::NonPositiveTolerance(k, v) => {
                write!(f, "tolerance {k} must be positive, got {v}")
            }
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=4).contains(&self.refine) {
            return Err(ConfigError::Parse(format!(
                "refine = {} out of range 2..=4",
                self.refine
            )));
        }
        for s in &self.suites {
            if !ALL_SUITES.contains(&s.as_str()) {
                return Err(ConfigError::UnknownSuite(s.clone()));
            }
        }
        for (k, &v) in &self.tolerances {
            if !(v > 0.0) {
                return Err(ConfigError::NonPositiveTolerance(k.clone(), v));
            }
        }
        Ok(())
    }

    pub fn tol(&self, key: &str) -> f64 {
        *self
            .tolerances
            .get(key)
            .unwrap_or_else(|| panic!("tolerance {key} missing from config"))
    }

    /// Canonical text form; its hash stamps every report.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[grid]");
        let _ = writeln!(out, "L = {:.12e}", self.grid_l);
        let _ = writeln!(out, "h = {:.12e}", self.grid_h);
        let _ = writeln!(out, "[quad]");
        let eps = self
            .epsilons
            .iter()
            .map(|e| format!("{e:.12e}"))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "epsilons = {eps}");
        let _ = writeln!(out, "richardson_order = {}", self.richardson_order);
        let _ = writeln!(out, "[chi]");
        let _ = writeln!(out, "sigma = {:.12e}", self.chi_sigma);
        let _ = writeln!(out, "[tolerances]");
        for (k, v) in &self.tolerances {
            let _ = writeln!(out, "{k} = {v:.12e}");
        }
        let _ = writeln!(out, "[refinement]");
        let _ = writeln!(out, "levels = {}", self.refine);
        let _ = writeln!(out, "[groups]");
        let ks = self
            .groups
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "ks = {ks}");
        let _ = writeln!(out, "[suites]");
        let _ = writeln!(out, "run = {}", self.suites.join(", "));
        out
    }

    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical_string().as_bytes())
    }

    /// Apply a TOML-style key-value file on top of the current values.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| ConfigError::Parse(format!("line {}: bad number {v}", lineno + 1)))
            };
            match (section.as_str(), key) {
                ("grid", "L") => self.grid_l = parse_f64(value)?,
                ("grid", "h") => self.grid_h = parse_f64(value)?,
                ("quad", "epsilons") => {
                    self.epsilons = value
                        .split(',')
                        .map(|v| parse_f64(v.trim()))
                        .collect::<Result<_, _>>()?;
                }
                ("quad", "richardson_order") => {
                    self.richardson_order = value.parse().map_err(|_| {
                        ConfigError::Parse(format!("line {}: bad integer {value}", lineno + 1))
                    })?;
                }
                ("chi", "sigma") => self.chi_sigma = parse_f64(value)?,
                ("tolerances", name) => {
                    self.tolerances.insert(name.to_string(), parse_f64(value)?);
                }
                ("refinement", "levels") => {
                    self.refine = value.parse().map_err(|_| {
                        ConfigError::Parse(format!("line {}: bad integer {value}", lineno + 1))
                    })?;
                }
                ("groups", "ks") => {
                    self.groups = value
                        .split(',')
                        .map(|v| {
                            v.trim().parse::<usize>().map_err(|_| {
                                ConfigError::Parse(format!(
                                    "line {}: bad group order {v}",
                                    lineno + 1
                                ))
                            })
                        })
                        .collect::<Result<_, _>>()?;
                }
                ("suites", "run") => {
                    self.suites = value
                        .split(',')
                        .map(|v| v.trim().to_string())
                        .filter(|v| !v.is_empty())
                        .collect();
                }
                (sec, k) => {
                    return Err(ConfigError::Parse(format!(
                        "line {}: unknown key {sec}.{k}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }
}
