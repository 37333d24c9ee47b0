use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{chirality, Branch, ChiralityVerdict, ConversionReport, Direction};
use super::run::{analyze, write_artifacts, write_json, RunArtifacts, RunSettings, DEFAULT_NOISE_OMEGA};
use crate::error::{arg, Result};
use crate::models::{HamiltonianPath, PerturbationSpec, TrajectorySpec};

pub const PRESET_NAMES: [&str; 9] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "ep-chiral", "fig8",
];

const T: f64 = 500.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Variant {
    pub name: &'static str,
    pub direction: Direction,
    pub trajectory: TrajectorySpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub variants: Vec<Variant>,
    /// Drive added to the Hamiltonian; `None` for noiseless runs.
    pub perturbation: Option<PerturbationSpec>,
}

fn circle(delta0: f64, g0: f64, omega: f64, phi: f64) -> TrajectorySpec {
    TrajectorySpec {
        delta0,
        g0,
        radius: 0.3,
        total_time: T,
        omega,
        phi,
    }
}

fn open(name: &'static str, spec: TrajectorySpec) -> Variant {
    Variant {
        name,
        direction: Direction::Open,
        trajectory: spec,
    }
}

fn both_ways(delta0: f64, g0: f64, phi: f64) -> Vec<Variant> {
    let cw = circle(delta0, g0, -2.0 * PI / T, phi);
    vec![
        Variant {
            name: "cw",
            direction: Direction::Cw,
            trajectory: cw,
        },
        Variant {
            name: "ccw",
            direction: Direction::Ccw,
            trajectory: cw.reversed(),
        },
    ]
}

pub fn fig1_trajectory() -> TrajectorySpec {
    circle(0.0, 1.0, -PI / T, 0.4 * PI)
}

pub fn fig2_trajectory() -> TrajectorySpec {
    circle(0.0, 1.0, PI / T, -0.6 * PI)
}

pub fn preset(name: &str) -> Result<Preset> {
    let (description, variants, epsilon) = match name {
        "fig1" => (
            "open arc, most growing state wins",
            vec![open("open", fig1_trajectory())],
            None,
        ),
        "fig2" => (
            "open arc, most growing state loses to the end-point fastest growing one",
            vec![open("open", fig2_trajectory())],
            None,
        ),
        "fig3" => (
            "loop around the EP at (0, 1), non-chiral",
            both_ways(0.0, 1.0, -0.75 * PI),
            None,
        ),
        "fig4" => (
            "loop not enclosing an EP with balanced gain, chiral",
            both_ways(0.0, 0.5, 0.0),
            None,
        ),
        "fig5" => (
            "fig1 and fig2 arcs with a controlled drive",
            vec![open("a-d", fig1_trajectory()), open("e-h", fig2_trajectory())],
            Some(1e-4),
        ),
        "fig6" => (
            "driven loop away from both EPs, non-chiral",
            both_ways(0.5, 0.5, 0.0),
            Some(1e-4),
        ),
        "fig7" => (
            "driven loop not enclosing an EP, chiral",
            both_ways(0.0, 0.5, 0.0),
            Some(1e-4),
        ),
        "ep-chiral" => (
            "driven loop around the EP at (0, 1) starting at phi = 0, chiral",
            both_ways(0.0, 1.0, 0.0),
            Some(1e-4),
        ),
        "fig8" => (
            "driven loop around the EP at (0, 1) starting at phi = -3pi/4, non-chiral",
            both_ways(0.0, 1.0, -0.75 * PI),
            Some(1e-4),
        ),
        other => {
            return arg(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            ))
        }
    };
    let name = PRESET_NAMES.iter().find(|n| **n == name).copied().unwrap_or("custom");
    Ok(Preset {
        name,
        description,
        variants,
        perturbation: epsilon.map(|e| PerturbationSpec::off_diagonal(e, DEFAULT_NOISE_OMEGA)),
    })
}

impl Preset {
    pub fn path(&self, variant: &Variant) -> Result<HamiltonianPath> {
        let path = HamiltonianPath::circle(variant.trajectory)?;
        match &self.perturbation {
            Some(p) => path.with_perturbation(p.clone()),
            None => Ok(path),
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.perturbation.as_ref().map(|p| p.epsilon)
    }

    /// The same preset without the drive.
    pub fn noiseless(&self) -> Self {
        Self {
            perturbation: None,
            ..self.clone()
        }
    }
}

/// Top-level `report.json` document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub description: String,
    pub epsilon: Option<f64>,
    pub settings: RunSettings,
    pub runs: Vec<ConversionReport>,
    pub chirality: Vec<ChiralityVerdict>,
}

impl Report {
    pub fn run(&self, label: &str) -> Option<&ConversionReport> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn chirality_for(&self, init: Branch) -> Option<&ChiralityVerdict> {
        self.chirality.iter().find(|c| c.cw.initial_state == init)
    }
}

pub struct PresetRun {
    pub report: Report,
    /// `(variant name, per-initial-state artifacts)`
    pub artifacts: Vec<(String, Vec<RunArtifacts>)>,
}

pub fn run_preset(name: &str, settings: &RunSettings) -> Result<PresetRun> {
    run_preset_def(&preset(name)?, settings, &[Branch::MINUS, Branch::PLUS])
}

/// Runs every variant for each initial eigenstate and pairs cw/ccw runs.
pub fn run_preset_def(preset: &Preset, settings: &RunSettings, inits: &[Branch]) -> Result<PresetRun> {
    let artifacts = preset
        .variants
        .par_iter()
        .map(|v| {
            let path = preset.path(v)?;
            Ok((v.name.to_string(), analyze(&path, settings, inits, v.name, v.direction)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<ConversionReport> = artifacts
        .iter()
        .flat_map(|(_, a)| a.iter().map(|r| r.report.clone()))
        .collect();
    let mut verdicts = Vec::new();
    for &init in inits {
        let find = |d: Direction| runs.iter().find(|r| r.direction == d && r.initial_state == init);
        if let (Some(cw), Some(ccw)) = (find(Direction::Cw), find(Direction::Ccw)) {
            verdicts.push(chirality(cw, ccw)?);
        }
    }
    Ok(PresetRun {
        report: Report {
            name: preset.name.to_string(),
            description: preset.description.to_string(),
            epsilon: preset.epsilon(),
            settings: settings.clone(),
            runs,
            chirality: verdicts,
        },
        artifacts,
    })
}

impl PresetRun {
    pub fn write(&self, dir: &Path) -> Result<()> {
        for (variant, runs) in &self.artifacts {
            write_artifacts(dir, variant, runs)?;
        }
        write_json(&dir.join("report.json"), &self.report)
    }
}
