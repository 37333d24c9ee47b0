use std::path::Path;

use serde::{Deserialize, Serialize};

use super::presets::{run_preset_def, Preset, PresetRun, Report, Variant};
use super::report::{Branch, Direction};
use super::run::{analyze, RunSettings, DEFAULT_NOISE_OMEGA};
use crate::error::{arg, Error, Result};
use crate::matlin::{c, ComplexMatrix};
use crate::models::{HamiltonianPath, PathKind, PerturbationSpec, TrajectorySpec};

/// Complex matrices are written as rows of `[re, im]` pairs.
pub type MatrixConfig = Vec<Vec<[f64; 2]>>;

fn to_matrix(m: &MatrixConfig) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<_>> = m
        .iter()
        .map(|r| r.iter().map(|&[re, im]| c(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathConfig {
    Circle {
        delta0: f64,
        g0: f64,
        radius: f64,
        total_time: f64,
        omega: f64,
        phi: f64,
    },
    LandauZener {
        slope: f64,
        coupling: f64,
        window: f64,
    },
    SampledTable {
        times: Vec<f64>,
        matrices: Vec<MatrixConfig>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub epsilon: f64,
    #[serde(default = "default_noise_omega")]
    pub omega: f64,
    /// Defaults to the off-diagonal ones matrix.
    #[serde(default)]
    pub coupling: Option<MatrixConfig>,
}

fn default_noise_omega() -> f64 {
    DEFAULT_NOISE_OMEGA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub steps: usize,
    pub outputs: usize,
    pub initial_states: Vec<Branch>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        let s = RunSettings::default();
        Self {
            steps: s.steps,
            outputs: s.outputs,
            initial_states: vec![Branch::MINUS, Branch::PLUS],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    pub grid: usize,
    pub include_lambda1: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            grid: RunSettings::default().grid,
            include_lambda1: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    pub y: f64,
    pub y_floor: f64,
    pub effective_noise_epsilon: f64,
    pub noise_omega: f64,
    /// Also run the reversed loop and report chirality.
    pub both_directions: bool,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let s = RunSettings::default();
        Self {
            y: s.y,
            y_floor: s.y_floor,
            effective_noise_epsilon: s.effective_noise_epsilon,
            noise_omega: s.noise_omega,
            both_directions: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub trajectory: PathConfig,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub grid: Option<usize>,
    pub y: Option<f64>,
    pub include_lambda1: bool,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.steps {
            self.integrator.steps = s;
        }
        if let Some(g) = o.grid {
            self.frame.grid = g;
        }
        if let Some(y) = o.y {
            self.classifier.y = y;
        }
        if o.include_lambda1 {
            self.frame.include_lambda1 = true;
        }
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            steps: self.integrator.steps,
            outputs: self.integrator.outputs,
            grid: self.frame.grid,
            y: self.classifier.y,
            y_floor: self.classifier.y_floor,
            effective_noise_epsilon: self.classifier.effective_noise_epsilon,
            noise_omega: self.classifier.noise_omega,
            include_lambda1: self.frame.include_lambda1,
        }
    }

    pub fn perturbation(&self) -> Result<Option<PerturbationSpec>> {
        let Some(p) = &self.perturbation else {
            return Ok(None);
        };
        let mut spec = PerturbationSpec::off_diagonal(p.epsilon, p.omega);
        if let Some(m) = &p.coupling {
            spec.coupling = to_matrix(m)?;
        }
        spec.validate()?;
        Ok(Some(spec))
    }

    pub fn path(&self) -> Result<HamiltonianPath> {
        let kind = match &self.trajectory {
            &PathConfig::Circle {
                delta0,
                g0,
                radius,
                total_time,
                omega,
                phi,
            } => PathKind::Circle2x2(TrajectorySpec {
                delta0,
                g0,
                radius,
                total_time,
                omega,
                phi,
            }),
            &PathConfig::LandauZener {
                slope,
                coupling,
                window,
            } => PathKind::LandauZener {
                slope,
                coupling,
                window,
            },
            PathConfig::SampledTable { times, matrices } => PathKind::SampledTable {
                times: times.clone(),
                matrices: matrices.iter().map(to_matrix).collect::<Result<_>>()?,
            },
        };
        let path = HamiltonianPath::new(kind)?;
        match self.perturbation()? {
            Some(p) => path.with_perturbation(p),
            None => Ok(path),
        }
    }

    pub fn initial_states(&self) -> Result<Vec<Branch>> {
        if self.integrator.initial_states.is_empty() {
            return arg("integrator.initial_states is empty");
        }
        Ok(self.integrator.initial_states.clone())
    }
}

/// `(variant, direction, path)` triples: the configured path, or the loop in
/// both directions when `classifier.both_directions` is set.
pub fn config_variants(cfg: &Config) -> Result<Vec<(String, Direction, HamiltonianPath)>> {
    let path = cfg.path()?;
    if !cfg.classifier.both_directions {
        return Ok(vec![("run".into(), Direction::Open, path)]);
    }
    let Some(spec) = path.trajectory() else {
        return arg("both_directions needs a circle trajectory");
    };
    let cw = if spec.omega < 0.0 { *spec } else { spec.reversed() };
    let mut out = Vec::new();
    for (name, dir, t) in [("cw", Direction::Cw, cw), ("ccw", Direction::Ccw, cw.reversed())] {
        let p = HamiltonianPath::circle(t)?;
        let p = match path.perturbation() {
            Some(pert) => p.with_perturbation(pert.clone())?,
            None => p,
        };
        out.push((name.to_string(), dir, p));
    }
    Ok(out)
}

/// Full analysis of a configured path, reversed as well when
/// `classifier.both_directions` is set.
pub fn run_config(cfg: &Config) -> Result<PresetRun> {
    let path = cfg.path()?;
    let settings = cfg.settings();
    let inits = cfg.initial_states()?;
    if !cfg.classifier.both_directions {
        let runs = analyze(&path, &settings, &inits, "run", Direction::Open)?;
        return Ok(PresetRun {
            report: Report {
                name: "config".into(),
                description: "configured run".into(),
                epsilon: path.perturbation().map(|p| p.epsilon),
                settings,
                runs: runs.iter().map(|r| r.report.clone()).collect(),
                chirality: vec![],
            },
            artifacts: vec![("run".into(), runs)],
        });
    }
    let variants = config_variants(cfg)?
        .into_iter()
        .map(|(_, direction, p)| Variant {
            name: if direction == Direction::Cw { "cw" } else { "ccw" },
            direction,
            trajectory: *p.trajectory().expect("circle"),
        })
        .collect();
    let preset = Preset {
        name: "config",
        description: "configured loop, both directions",
        variants,
        perturbation: path.perturbation().cloned(),
    };
    run_preset_def(&preset, &settings, &inits)
}
