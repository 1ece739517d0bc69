//! Flat `key = value` run configuration.

use std::collections::HashMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::{
    DensityFamily, DensityShape, FieldFamily, FieldShape, InitialDataSpec, Interpolation, PhaseGrid,
};

/// Which engines a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineSelect {
    Picard,
    Direct,
    /// Picard is the primary output; the direct engine runs alongside for
    /// the cross-engine distance.
    Both,
}

impl EngineSelect {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "picard" => Some(EngineSelect::Picard),
            "direct" => Some(EngineSelect::Direct),
            "both" => Some(EngineSelect::Both),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EngineSelect::Picard => "picard",
            EngineSelect::Direct => "direct",
            EngineSelect::Both => "both",
        }
    }

    pub fn runs_picard(self) -> bool {
        self != EngineSelect::Direct
    }

    pub fn runs_direct(self) -> bool {
        self != EngineSelect::Picard
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nx: usize,
    pub nv: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub engine: EngineSelect,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub data: InitialDataSpec,
    pub interpolation: Interpolation,
    pub diag_holder: bool,
    pub diag_scenario: bool,
    pub diag_residual: bool,
    /// Majorant constant; `None` skips the majorant.
    #[serde(rename = "majorant_C")]
    pub majorant_c: Option<f64>,
    pub majorant_cap: f64,
    /// Continuation flag level as a multiple of the initial indicator.
    pub blowup_cap_factor: f64,
    /// Largest admissible relative mass drift.
    pub mass_tol: f64,
    /// Cross-engine tolerance is `max(5 picard_tol, C (dt^2 + dx^3))`.
    #[serde(rename = "cross_engine_C")]
    pub cross_engine_c: f64,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    /// Reserved. The engines are deterministic and never read it.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            x_min: -4.0,
            x_max: 4.0,
            v_min: -4.0,
            v_max: 4.0,
            nx: 257,
            nv: 257,
            dt: 1.0 / 256.0,
            t_final: 1.0,
            engine: EngineSelect::Direct,
            picard_tol: 1e-8,
            picard_max_iter: 15,
            data: InitialDataSpec {
                density: DensityFamily::bump(1.0, 0.0, 0.0, 0.5),
                field: FieldFamily::new(FieldShape::Gaussian, 0.5, 1.0),
            },
            interpolation: Interpolation::Cubic,
            diag_holder: false,
            diag_scenario: false,
            diag_residual: false,
            majorant_c: None,
            majorant_cap: 1e6,
            blowup_cap_factor: 1e3,
            mass_tol: 1e-4,
            cross_engine_c: 10.0,
            snapshot_times: Vec::new(),
            out_dir: PathBuf::from("svmlab_out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new([self.x_min, self.x_max], [self.v_min, self.v_max], self.nx, self.nv)
    }

    /// Number of steps `T / dt`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Stored level closest to `t`.
    pub fn level_of(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    pub fn cross_engine_tolerance(&self, dx: f64) -> f64 {
        (5.0 * self.picard_tol).max(self.cross_engine_c * (self.dt * self.dt + dx * dx * dx))
    }
}

const KEYS: &[&str] = &[
    "x_min",
    "x_max",
    "v_min",
    "v_max",
    "nx",
    "nv",
    "dt",
    "T",
    "engine",
    "picard_tol",
    "picard_max_iter",
    "f0_family",
    "f0_amplitude",
    "f0_center_x",
    "f0_center_v",
    "f0_width",
    "b0_family",
    "b0_amplitude",
    "b0_width",
    "diag_holder",
    "diag_scenario",
    "diag_residual",
    "majorant_C",
    "majorant_cap",
    "snapshot_times",
    "out_dir",
    "interpolation",
    "blowup_cap_factor",
    "mass_tol",
    "cross_engine_C",
    "seed",
];

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn number(line: usize, key: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| err(line, format!("{key}: expected a finite number, got `{s}`")))
}

fn count(line: usize, key: &str, s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| err(line, format!("{key}: expected a non-negative integer, got `{s}`")))
}

fn flag(line: usize, key: &str, s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("{key}: expected true or false, got `{s}`"))),
    }
}

/// Parses and validates a run configuration.
///
/// ```
/// use svmlab::scenario::parse_config;
///
/// let cfg = parse_config("T = 0.5  # half the default horizon\n").unwrap();
/// assert_eq!(cfg.t_final, 0.5);
/// assert_eq!(cfg.nx, 257);
/// assert!(parse_config("dt = 0.3\nT = 1.0\n").is_err());
/// ```
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(err(line, format!("expected `key = value`, got `{body}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = KEYS.iter().find(|k| **k == key) else {
            return Err(err(line, format!("unknown key `{key}`")));
        };
        if let Some(prev) = seen.insert(key, line) {
            return Err(err(line, format!("`{key}` already set on line {prev}")));
        }
        let d = &mut cfg.data;
        match key {
            "x_min" => cfg.x_min = number(line, key, value)?,
            "x_max" => cfg.x_max = number(line, key, value)?,
            "v_min" => cfg.v_min = number(line, key, value)?,
            "v_max" => cfg.v_max = number(line, key, value)?,
            "nx" => cfg.nx = count(line, key, value)?,
            "nv" => cfg.nv = count(line, key, value)?,
            "dt" => cfg.dt = number(line, key, value)?,
            "T" => cfg.t_final = number(line, key, value)?,
            "engine" => {
                cfg.engine = EngineSelect::parse(value)
                    .ok_or_else(|| err(line, format!("engine: expected picard, direct or both, got `{value}`")))?
            }
            "picard_tol" => cfg.picard_tol = number(line, key, value)?,
            "picard_max_iter" => cfg.picard_max_iter = count(line, key, value)?,
            "f0_family" => {
                d.density.shape = DensityShape::parse(value)
                    .ok_or_else(|| err(line, format!("f0_family: unknown family `{value}`")))?
            }
            "f0_amplitude" => d.density.amplitude = number(line, key, value)?,
            "f0_center_x" => d.density.center_x = number(line, key, value)?,
            "f0_center_v" => d.density.center_v = number(line, key, value)?,
            "f0_width" => d.density.width = number(line, key, value)?,
            "b0_family" => {
                d.field.shape = FieldShape::parse(value)
                    .ok_or_else(|| err(line, format!("b0_family: unknown family `{value}`")))?
            }
            "b0_amplitude" => d.field.amplitude = number(line, key, value)?,
            "b0_width" => d.field.width = number(line, key, value)?,
            "diag_holder" => cfg.diag_holder = flag(line, key, value)?,
            "diag_scenario" => cfg.diag_scenario = flag(line, key, value)?,
            "diag_residual" => cfg.diag_residual = flag(line, key, value)?,
            "majorant_C" => {
                cfg.majorant_c = match value {
                    "none" => None,
                    _ => Some(number(line, key, value)?),
                }
            }
            "majorant_cap" => cfg.majorant_cap = number(line, key, value)?,
            "snapshot_times" => {
                cfg.snapshot_times = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| number(line, key, s))
                    .collect::<Result<_>>()?
            }
            "out_dir" => {
                if value.is_empty() {
                    return Err(err(line, "out_dir: empty path"));
                }
                cfg.out_dir = PathBuf::from(value)
            }
            "interpolation" => {
                cfg.interpolation = Interpolation::parse(value)
                    .ok_or_else(|| err(line, format!("interpolation: expected cubic or monotone, got `{value}`")))?
            }
            "blowup_cap_factor" => cfg.blowup_cap_factor = number(line, key, value)?,
            "mass_tol" => cfg.mass_tol = number(line, key, value)?,
            "cross_engine_C" => cfg.cross_engine_c = number(line, key, value)?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(line, format!("seed: expected an unsigned integer, got `{value}`")))?
            }
            _ => unreachable!("key list and match arms agree"),
        }
    }
    let at = |keys: &[&str]| keys.iter().filter_map(|k| seen.get(k)).copied().max().unwrap_or(0);
    validate(&cfg, at)?;
    Ok(cfg)
}

/// Invariant checks; `at` maps the keys involved to the line that set the
/// last of them (0 when all are defaults).
fn validate(cfg: &RunConfig, at: impl Fn(&[&str]) -> usize) -> Result<()> {
    let grid_keys = ["x_min", "x_max", "v_min", "v_max", "nx", "nv"];
    cfg.grid().map_err(|e| err(at(&grid_keys), e.to_string()))?;
    if !(cfg.t_final > 0.0) {
        return Err(err(at(&["T"]), format!("T must be positive, got {}", cfg.t_final)));
    }
    if !(cfg.dt > 0.0) {
        return Err(err(at(&["dt"]), format!("dt must be positive, got {}", cfg.dt)));
    }
    let ratio = cfg.t_final / cfg.dt;
    if (ratio - ratio.round()).abs() > 1e-12 * ratio.max(1.0) || ratio.round() < 1.0 {
        return Err(err(
            at(&["dt", "T"]),
            format!("dt = {} does not divide T = {}", cfg.dt, cfg.t_final),
        ));
    }
    if !(cfg.picard_tol > 0.0) {
        return Err(err(at(&["picard_tol"]), "picard_tol must be positive"));
    }
    if cfg.picard_max_iter == 0 {
        return Err(err(at(&["picard_max_iter"]), "picard_max_iter must be at least 1"));
    }
    let f0_keys = ["f0_family", "f0_amplitude", "f0_center_x", "f0_center_v", "f0_width"];
    cfg.data
        .density
        .validate()
        .map_err(|e| err(at(&f0_keys), e.to_string()))?;
    cfg.data
        .field
        .validate()
        .map_err(|e| err(at(&["b0_family", "b0_amplitude", "b0_width"]), e.to_string()))?;
    if let Some(c) = cfg.majorant_c {
        if c < 0.0 {
            return Err(err(at(&["majorant_C"]), format!("majorant_C must be >= 0, got {c}")));
        }
        if !(cfg.majorant_cap > c) {
            return Err(err(
                at(&["majorant_C", "majorant_cap"]),
                format!("majorant_cap must exceed majorant_C, got {}", cfg.majorant_cap),
            ));
        }
    }
    for (key, v) in [
        ("blowup_cap_factor", cfg.blowup_cap_factor),
        ("mass_tol", cfg.mass_tol),
        ("cross_engine_C", cfg.cross_engine_c),
    ] {
        if !(v > 0.0) {
            return Err(err(at(&[key]), format!("{key} must be positive, got {v}")));
        }
    }
    for &t in &cfg.snapshot_times {
        let k = t / cfg.dt;
        if t < 0.0 || t > cfg.t_final * (1.0 + 1e-12) || (k - k.round()).abs() > 1e-9 {
            return Err(err(
                at(&["snapshot_times", "dt", "T"]),
                format!("snapshot time {t} is not a stored level in [0, {}]", cfg.t_final),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn only_horizon_set() {
        let cfg = parse_config("T = 0.5\n").unwrap();
        assert_eq!(cfg, RunConfig { t_final: 0.5, ..RunConfig::default() });
    }

    #[test]
    fn dt_must_divide_horizon() {
        let e = parse_config("dt = 0.3\nT = 1.0\n").unwrap_err();
        assert_eq!(line_of(e), 2);
        assert!(parse_config("dt = 0.25\nT = 1.0\n").is_ok());
    }

    #[test]
    fn both_engines_with_scenario_family() {
        let text = "\
# data with support above v = 1 and a nonnegative field
engine = both
f0_family = bump
f0_center_v = 2.5
f0_width = 1
b0_family = bump
b0_amplitude = 0.5
diag_scenario = true
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.engine, EngineSelect::Both);
        assert!(cfg.engine.runs_picard() && cfg.engine.runs_direct());
        assert_eq!(cfg.data.density.center_v, 2.5);
        assert_eq!(cfg.data.field.shape, FieldShape::Bump);
        assert!(cfg.diag_scenario);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse_config("\n\nbogus = 1\n").unwrap_err()), 3);
        assert_eq!(line_of(parse_config("T = 1\nnx\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_config("nx = 1.5\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_config("T = 1\nT = 2\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_config("# c\npicard_tol = 0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_config("snapshot_times = 0.5, 0.3\n").unwrap_err()), 1);
        assert_eq!(line_of(parse_config("x_min = 1\nx_max = 0\n").unwrap_err()), 2);
    }

    #[test]
    fn lists_and_options() {
        let cfg = parse_config("T = 0.5\nsnapshot_times = 0, 0.25,0.5\nmajorant_C = 2\n").unwrap();
        assert_eq!(cfg.snapshot_times, vec![0.0, 0.25, 0.5]);
        assert_eq!(cfg.majorant_c, Some(2.0));
        assert_eq!(parse_config("majorant_C = none\n").unwrap().majorant_c, None);
    }
}
