//! `key = value` experiment configuration with `[section]` headers.
//!
//! Each subcommand reads the section named after its experiment; keys
//! outside any section apply to every experiment. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use strainlim::fem::StressSpace;
use strainlim::material::LinearForm;
use strainlim::solver::LinearSolver;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{key}` for experiment {experiment}")]
    UnknownKey { experiment: &'static str, key: String },
    #[error("invalid value `{value}` for `{key}`: {msg}")]
    Value { key: String, value: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Validate,
    NSweep,
    Crack,
    InfSup,
    Checkerboard,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::NSweep => "n_sweep",
            Experiment::Crack => "crack",
            Experiment::InfSup => "infsup",
            Experiment::Checkerboard => "checkerboard",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Validate => &["n", "t", "levels", "law", "tau", "tol", "linear_solver", "cg_rtol", "max_outer", "linear_form"],
            Experiment::NSweep => &["ns", "t_mode", "level", "law", "tau", "tol", "linear_solver", "cg_rtol", "max_outer", "linear_form"],
            Experiment::Crack => &["n", "t", "level", "forces", "vtk", "law", "tau", "tol", "linear_solver", "cg_rtol", "max_outer", "linear_form"],
            Experiment::InfSup => &["levels", "stress"],
            Experiment::Checkerboard => &["n_interior", "exponents"],
        }
    }
}

/// Which `t` values the `n` sweep covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TMode {
    One,
    EqualN,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: f64,
    pub t: f64,
    pub tau: f64,
    pub tol: f64,
    pub max_outer: usize,
    /// Conjugate gradients instead of the direct Schur solver.
    pub use_cg: bool,
    pub cg_rtol: f64,
    pub linear_form: LinearForm,
    /// Mesh levels (`2^level` cells per side) for refinement studies.
    pub levels: Vec<u32>,
    /// Single mesh level for fixed-mesh studies.
    pub level: u32,
    pub ns: Vec<f64>,
    pub t_mode: TMode,
    pub forces: Vec<f64>,
    pub vtk: bool,
    pub stress: Vec<StressSpace>,
    /// Interior node counts per side of the checkerboard meshes.
    pub n_interior: Vec<usize>,
    /// Values of `n` in the checkerboard quotient.
    pub exponents: Vec<f64>,
}

impl ExperimentConfig {
    /// Defaults of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            n: 1.0,
            t: 1.0,
            tau: 0.01,
            tol: 1e-5,
            max_outer: 100_000,
            use_cg: false,
            cg_rtol: 1e-12,
            linear_form: LinearForm::Split,
            levels: (2..=7).collect(),
            level: 7,
            ns: vec![1.0, 500.0, 1000.0],
            t_mode: TMode::Both,
            forces: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
            vtk: true,
            stress: vec![StressSpace::P0],
            n_interior: vec![7, 15, 31, 63],
            exponents: vec![1.0, 2.0],
        };
        match experiment {
            Experiment::Crack => ExperimentConfig { n: 100.0, tau: 2.0, level: 6, ..base },
            Experiment::InfSup => ExperimentConfig { levels: (2..=6).collect(), ..base },
            _ => base,
        }
    }

    /// Defaults overridden by the global keys and the experiment's section.
    pub fn from_text(experiment: Experiment, text: &str) -> Result<Self, ConfigError> {
        let sections = parse_sections(text)?;
        let mut cfg = Self::defaults(experiment);
        for name in ["", experiment.name()] {
            if let Some(entries) = sections.get(name) {
                for (key, value) in entries {
                    cfg.set(key, value, name.is_empty())?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(experiment: Experiment, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::from_text(experiment, &text)
    }

    fn set(&mut self, key: &str, value: &str, global: bool) -> Result<(), ConfigError> {
        if !self.experiment.keys().contains(&key) {
            if global {
                return Ok(());
            }
            return Err(ConfigError::UnknownKey { experiment: self.experiment.name(), key: key.to_string() });
        }
        let bad = |msg: &str| ConfigError::Value { key: key.to_string(), value: value.to_string(), msg: msg.to_string() };
        let real = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
        let list = |v: &str| -> Vec<String> { v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect() };
        match key {
            "n" => self.n = real(value)?,
            "t" => self.t = real(value)?,
            "tau" => self.tau = real(value)?,
            "tol" => self.tol = real(value)?,
            "max_outer" => self.max_outer = int(value)?,
            "cg_rtol" => self.cg_rtol = real(value)?,
            "linear_solver" => {
                self.use_cg = match value {
                    "direct" => false,
                    "cg" => true,
                    _ => return Err(bad("expected `direct` or `cg`")),
                }
            }
            "linear_form" => {
                self.linear_form = match value {
                    "scaled" => LinearForm::Scaled,
                    "split" => LinearForm::Split,
                    _ => return Err(bad("expected `scaled` or `split`")),
                }
            }
            "law" => {
                if value != "builtin" {
                    return Err(bad("only the `builtin` law is available"));
                }
            }
            "levels" => {
                self.levels = list(value).iter().map(|s| s.parse().map_err(|_| bad("expected integers"))).collect::<Result<_, _>>()?
            }
            "level" => self.level = int(value)? as u32,
            "ns" => self.ns = list(value).iter().map(|s| real(s)).collect::<Result<_, _>>()?,
            "t_mode" => {
                self.t_mode = match value {
                    "one" => TMode::One,
                    "n" => TMode::EqualN,
                    "both" => TMode::Both,
                    _ => return Err(bad("expected `one`, `n` or `both`")),
                }
            }
            "forces" => self.forces = list(value).iter().map(|s| real(s)).collect::<Result<_, _>>()?,
            "vtk" => self.vtk = value.parse().map_err(|_| bad("expected `true` or `false`"))?,
            "stress" => {
                self.stress = list(value)
                    .iter()
                    .map(|s| match s.as_str() {
                        "p0" | "q0" => Ok(StressSpace::P0),
                        "q1disc" => Ok(StressSpace::Q1Disc),
                        _ => Err(bad("expected `q0` or `q1disc`")),
                    })
                    .collect::<Result<_, _>>()?
            }
            "n_interior" => self.n_interior = list(value).iter().map(|s| int(s)).collect::<Result<_, _>>()?,
            "exponents" => self.exponents = list(value).iter().map(|s| real(s)).collect::<Result<_, _>>()?,
            _ => unreachable!("key list and match arms agree"),
        }
        Ok(())
    }

    pub fn linear_solver(&self) -> LinearSolver {
        if self.use_cg {
            LinearSolver::ConjugateGradient { rtol: self.cg_rtol }
        } else {
            LinearSolver::Direct
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| ConfigError::Value { key: key.to_string(), value: String::new(), msg: msg.to_string() };
        if !(self.tol > 0.0) {
            return Err(bad("tol", "must be positive"));
        }
        if !(self.cg_rtol > 0.0) {
            return Err(bad("cg_rtol", "must be positive"));
        }
        if !(self.tau > 0.0) {
            return Err(bad("tau", "must be positive"));
        }
        if matches!(self.experiment, Experiment::Validate | Experiment::InfSup) && self.levels.is_empty() {
            return Err(bad("levels", "at least one level required"));
        }
        if self.experiment == Experiment::Checkerboard && self.n_interior.len() < 2 {
            return Err(bad("n_interior", "at least two meshes are needed to fit a rate"));
        }
        Ok(())
    }
}

type Sections = BTreeMap<String, Vec<(String, String)>>;

fn parse_sections(text: &str) -> Result<Sections, ConfigError> {
    let mut out: Sections = BTreeMap::new();
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| ConfigError::Syntax { line: i + 1, msg: msg.to_string() };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err("unterminated section header"))?.trim();
            if name.is_empty() {
                return Err(err("empty section name"));
            }
            current = name.replace('-', "_");
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(err("empty key"));
        }
        out.entry(current.clone()).or_default().push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
