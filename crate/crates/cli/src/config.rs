//! JSON run configuration with defaults, collected validation and `u0`
//! presets.

use std::path::Path;

use phytospde_core::solver::RecordOptions;
use phytospde_core::{
    ApproxCoefficient, Field, KernelSpec, ModelParams, NoiseSpec, SolverConfig, SolverMode,
    SpatialGrid,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::io::read_snapshot;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// The configuration document. Every key is optional and falls back to the
/// value in [`ConfigDoc::default`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigDoc {
    #[serde(rename = "D")]
    pub diffusion: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    #[serde(rename = "J")]
    pub modes: usize,
    /// Chemotaxis on or off.
    pub kernel: bool,
    pub r0: f64,
    pub r1: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_approx: u32,
    pub continuity_fix: bool,
    pub seed: u64,
    pub stream_id: u64,
    /// `exponential_euler`, `picard` or `deterministic`.
    pub mode: String,
    pub snapshot_every: usize,
    /// `constant:c`, `bump:center,width,height` or `file:path`.
    pub u0: String,
    pub record_martingale: bool,
    pub record_convolution: bool,
}

impl Default for ConfigDoc {
    fn default() -> Self {
        Self {
            diffusion: 1.0,
            lambda: 1.0,
            length: 1.0,
            cells: 256,
            modes: 128,
            kernel: true,
            r0: 0.05,
            r1: 0.25,
            dt: 1e-4,
            t_end: 1.0,
            n_approx: 16,
            continuity_fix: true,
            seed: 0,
            stream_id: 0,
            mode: "exponential_euler".into(),
            snapshot_every: 1000,
            u0: "constant:1.0".into(),
            record_martingale: false,
            record_convolution: false,
        }
    }
}

const KEYS: &[&str] = &[
    "D",
    "lambda",
    "L",
    "N",
    "J",
    "kernel",
    "r0",
    "r1",
    "dt",
    "t_end",
    "n_approx",
    "continuity_fix",
    "seed",
    "stream_id",
    "mode",
    "snapshot_every",
    "u0",
    "record_martingale",
    "record_convolution",
];

pub fn parse_mode(s: &str) -> Option<SolverMode> {
    match s {
        "exponential_euler" => Some(SolverMode::ExponentialEuler),
        "picard" => Some(SolverMode::Picard),
        "deterministic" => Some(SolverMode::Deterministic),
        _ => None,
    }
}

/// A cosine bump `height·(1 + cos(π(x − center)/width))/2` on
/// `|x − center| < width`, zero elsewhere.
pub fn bump(x: f64, center: f64, width: f64, height: f64) -> f64 {
    let s = (x - center) / width;
    if s.abs() < 1.0 {
        0.5 * height * (1.0 + (std::f64::consts::PI * s).cos())
    } else {
        0.0
    }
}

fn parse_numbers(s: &str, count: usize) -> Option<Vec<f64>> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
    (v.len() == count).then_some(v)
}

/// Resolves a `u0` preset on `grid`. Relative `file:` paths are taken from
/// `base_dir`.
pub fn initial_field(preset: &str, grid: SpatialGrid, base_dir: &Path) -> Result<Field, String> {
    let (kind, arg) = preset
        .split_once(':')
        .ok_or_else(|| format!("u0 preset '{preset}' has no ':'"))?;
    match kind {
        "constant" => {
            let c = parse_numbers(arg, 1).ok_or("u0 constant needs one number")?[0];
            Field::new(grid, vec![c; grid.cells()]).map_err(|e| e.to_string())
        }
        "bump" => {
            let p = parse_numbers(arg, 3).ok_or("u0 bump needs center,width,height")?;
            if !(p[1] > 0.0) {
                return Err("u0 bump width > 0 required".into());
            }
            Field::from_fn(grid, |x| bump(x, p[0], p[1], p[2])).map_err(|e| e.to_string())
        }
        "file" => {
            let path = base_dir.join(arg);
            let (field, _) = read_snapshot(&path, Some(grid)).map_err(|e| e.to_string())?;
            Ok(field)
        }
        other => Err(format!("unknown u0 preset '{other}'")),
    }
}

/// A validated configuration together with the document it came from.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub doc: ConfigDoc,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_doc(doc: ConfigDoc, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut problems: Vec<String> = Vec::new();
        let mode = parse_mode(&doc.mode);
        if mode.is_none() {
            problems.push(format!(
                "mode must be exponential_euler, picard or deterministic, not '{}'",
                doc.mode
            ));
        }
        if doc.kernel && !(doc.r0 >= 0.0 && doc.r0 < doc.r1) {
            problems.push("r0 < r1 required".into());
        }
        if doc.n_approx == 0 {
            problems.push("n_approx >= 1 required".into());
        }
        let grid = match SpatialGrid::new(doc.length, doc.cells) {
            Ok(g) => Some(g),
            Err(e) => {
                problems.push(core_message(e));
                None
            }
        };
        let kernel = match (grid, doc.kernel) {
            (Some(g), true) if doc.r0 < doc.r1 => match KernelSpec::new(doc.r0, doc.r1, g) {
                Ok(k) => Some(k),
                Err(e) => {
                    problems.push(core_message(e));
                    None
                }
            },
            _ => None,
        };
        let u0 = grid.and_then(|g| match initial_field(&doc.u0, g, base_dir) {
            Ok(f) => Some(f),
            Err(e) => {
                problems.push(e);
                None
            }
        });
        let Some(u0) = u0 else {
            return Err(ConfigError::Invalid(problems));
        };
        let params = ModelParams {
            diffusion: doc.diffusion,
            lambda: doc.lambda,
            kernel,
            u0,
        };
        let coefficient = ApproxCoefficient {
            n: doc.n_approx.max(1),
            lambda: doc.lambda,
            continuity_fix: doc.continuity_fix,
        };
        let solver = SolverConfig {
            params,
            coefficient,
            dt: doc.dt,
            t_end: doc.t_end,
            modes: doc.modes,
            noise: NoiseSpec::new(doc.seed, doc.stream_id),
            snapshot_every: doc.snapshot_every,
            mode: mode.unwrap_or(SolverMode::ExponentialEuler),
            record: RecordOptions {
                martingale: doc.record_martingale,
                stochastic_convolution: doc.record_convolution,
            },
        };
        if let Err(e) = solver.validate() {
            problems.extend(core_message(e).split("; ").map(String::from));
        }
        if problems.is_empty() {
            Ok(Self { doc, solver })
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }
}

fn core_message(e: phytospde_core::Error) -> String {
    match e {
        phytospde_core::Error::Config(msg) | phytospde_core::Error::Domain(msg) => msg,
        other => other.to_string(),
    }
}

/// Parses a configuration document, or a run manifest whose `config` entry
/// is one.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut map = match value {
        Value::Object(m) => m,
        _ => return Err(ConfigError::Syntax("top level must be an object".into())),
    };
    if map.contains_key("code_version") {
        if let Some(Value::Object(inner)) = map.remove("config") {
            map = inner;
        }
    }
    let unknown: Vec<String> = map
        .keys()
        .filter(|k| !KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }
    let doc = doc_from_map(map)?;
    RunConfig::from_doc(doc, base_dir)
}

fn doc_from_map(map: Map<String, Value>) -> Result<ConfigDoc, ConfigError> {
    let mut problems = Vec::new();
    let mut merged = serde_json::to_value(ConfigDoc::default()).expect("defaults serialize");
    let defaults = merged.as_object_mut().expect("object");
    for (k, v) in map {
        let expected = &defaults[&k];
        let fits = match (expected, &v) {
            (Value::Number(d), Value::Number(n)) => !(d.is_u64() && !n.is_u64()),
            (Value::Bool(_), Value::Bool(_)) | (Value::String(_), Value::String(_)) => true,
            _ => false,
        };
        if fits {
            defaults.insert(k, v);
        } else {
            problems.push(format!("{k}: expected a value like {expected}, got {v}"));
        }
    }
    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems));
    }
    serde_json::from_value(merged).map_err(|e| ConfigError::Syntax(e.to_string()))
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}
