use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{
    classify_endpoint_fastest_with, classify_most_growing, detect_switch_times,
    naive_crossing_times, winner, MostGrowing,
};
use super::report::{Branch, ConversionReport, Direction, PerMethod};
use crate::error::{arg, Error, Result};
use crate::evolve::{simulate, StateHistory};
use crate::matlin::ComplexVector;
use crate::models::{HamiltonianPath, PerturbationSpec};
use crate::predict::{
    advanced_series_with, eigenbasis_coefficients, naive_series_with, PredictOptions,
    PredictionSeries,
};
use crate::spectral::{build_frame, SpectralFrame};

pub const DEFAULT_NOISE_OMEGA: f64 = 2.0 * std::f64::consts::PI / 5.0;

/// Numerical knobs shared by presets, config runs and sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub steps: usize,
    pub outputs: usize,
    pub grid: usize,
    pub y: f64,
    pub y_floor: f64,
    /// Drive strength the advanced predictor assumes when the path itself
    /// carries no perturbation.
    pub effective_noise_epsilon: f64,
    pub noise_omega: f64,
    pub include_lambda1: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            steps: 50_000,
            outputs: 1001,
            grid: 5000,
            y: super::classify::DEFAULT_WINDOW,
            y_floor: super::classify::WINDOW_FLOOR,
            effective_noise_epsilon: 1e-14,
            noise_omega: DEFAULT_NOISE_OMEGA,
            include_lambda1: false,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.outputs < 2 || self.steps < self.outputs - 1 {
            return arg("need outputs >= 2 and steps >= outputs - 1");
        }
        if self.grid < 100 {
            return arg("grid must be >= 100");
        }
        if !(self.effective_noise_epsilon >= 0.0) {
            return arg("effective_noise_epsilon must be >= 0");
        }
        Ok(())
    }

    /// The drive the advanced predictor uses for `path`.
    pub fn advanced_perturbation(&self, path: &HamiltonianPath) -> PerturbationSpec {
        match path.perturbation() {
            Some(p) => p.clone(),
            None => PerturbationSpec::off_diagonal(self.effective_noise_epsilon, self.noise_omega),
        }
    }

    pub fn predict_options(&self) -> PredictOptions {
        PredictOptions {
            include_lambda1: self.include_lambda1,
            t1_window: None,
        }
    }
}

/// Everything produced for one (path, initial state) pair.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub report: ConversionReport,
    pub frame: Arc<SpectralFrame>,
    pub history: StateHistory,
    pub naive: PredictionSeries,
    pub advanced: PredictionSeries,
}

/// Frame, endpoint and most-growing classification for a path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub most_growing: Option<Branch>,
    pub endpoint_fastest: Option<Branch>,
    pub endpoint_window: Option<f64>,
    pub naive_crossings: Vec<f64>,
    pub slowness_diagnostic: f64,
    pub notes: Vec<String>,
}

pub fn classify_frame(path: &HamiltonianPath, frame: &SpectralFrame, settings: &RunSettings) -> Classification {
    let mut notes = Vec::new();
    let most_growing = match classify_most_growing(frame) {
        MostGrowing::Branch(b) => Some(Branch(b)),
        MostGrowing::Tie => {
            notes.push("most growing state is a tie: Im Lambda(T) agree within 1e-9".into());
            None
        }
    };
    let (endpoint_fastest, endpoint_window) =
        match classify_endpoint_fastest_with(frame, settings.y, settings.y_floor) {
            Ok(v) => (Some(Branch(v.branch)), Some(v.y)),
            Err(e) => {
                notes.push(e.to_string());
                (None, None)
            }
        };
    let mut slowness = path.slowness_diagnostic(frame.len().min(2001));
    if !slowness.is_finite() {
        notes.push("slowness diagnostic is unbounded".into());
        slowness = f64::MAX;
    } else if slowness > 0.1 {
        notes.push(format!("slowness diagnostic {slowness:.3} exceeds 0.1"));
    }
    Classification {
        most_growing,
        endpoint_fastest,
        endpoint_window,
        naive_crossings: naive_crossing_times(frame),
        slowness_diagnostic: slowness,
        notes,
    }
}

/// Builds the frame once and runs simulation plus both predictors for every
/// initial eigenstate, in parallel. `variant` prefixes run labels.
pub fn analyze(
    path: &HamiltonianPath,
    settings: &RunSettings,
    initial_states: &[Branch],
    variant: &str,
    direction: Direction,
) -> Result<Vec<RunArtifacts>> {
    settings.validate()?;
    let frame = Arc::new(build_frame(path, settings.grid)?);
    if let Some(b) = initial_states.iter().find(|b| b.0 >= frame.dim()) {
        return arg(format!("initial state {b} does not exist for dimension {}", frame.dim()));
    }
    let class = classify_frame(path, &frame, settings);
    let pert = settings.advanced_perturbation(path);
    initial_states
        .par_iter()
        .map(|&init| {
            let psi0 = frame.frames[0].column(init.0);
            run_one(path, &frame, &psi0, init, settings, &pert, &class, variant, direction)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    path: &HamiltonianPath,
    frame: &Arc<SpectralFrame>,
    psi0: &ComplexVector,
    init: Branch,
    settings: &RunSettings,
    pert: &PerturbationSpec,
    class: &Classification,
    variant: &str,
    direction: Direction,
) -> Result<RunArtifacts> {
    let history = simulate(path, frame, psi0, settings.steps, settings.outputs)?;
    let phi0 = eigenbasis_coefficients(frame, psi0)?;
    let opts = settings.predict_options();
    let naive = naive_series_with(frame, &phi0, &opts)?;
    let advanced = advanced_series_with(frame, &phi0, pert, &opts)?;

    let winners = PerMethod {
        simulation: Branch(winner(history.final_populations())),
        naive: Branch(winner(naive.final_populations())),
        advanced: Branch(winner(advanced.final_populations())),
    };
    let switch_times = PerMethod {
        simulation: detect_switch_times(&history.times, &history.population_of(winners.simulation.0), 0.5),
        naive: detect_switch_times(&naive.times, &naive.population_of(winners.naive.0), 0.5),
        advanced: detect_switch_times(&advanced.times, &advanced.population_of(winners.advanced.0), 0.5),
    };
    let mut notes = class.notes.clone();
    if path.perturbation().is_none() {
        notes.push(format!(
            "advanced prediction assumes an effective drive with epsilon = {:e}",
            pert.epsilon
        ));
    }
    let report = ConversionReport {
        label: format!("{variant}/{init}"),
        direction,
        initial_state: init,
        trajectory: path.trajectory().copied(),
        most_growing: class.most_growing,
        endpoint_fastest: class.endpoint_fastest,
        endpoint_window: class.endpoint_window,
        winners,
        final_populations: PerMethod {
            simulation: history.final_populations().to_vec(),
            naive: naive.final_populations().to_vec(),
            advanced: advanced.final_populations().to_vec(),
        },
        switch_times,
        naive_crossings: class.naive_crossings.clone(),
        advanced_epsilon: pert.epsilon,
        slowness_diagnostic: class.slowness_diagnostic,
        notes,
    };
    Ok(RunArtifacts {
        report,
        frame: Arc::clone(frame),
        history,
        naive,
        advanced,
    })
}

pub(crate) fn file_tag(b: Branch) -> String {
    match b.0 {
        0 => "plus".into(),
        1 => "minus".into(),
        n => format!("b{n}"),
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(Error::from)
}

/// Writes `frame_<variant>.csv`, `history_<variant>_<state>.csv`,
/// `naive_…` and `advanced_…` into `dir`.
pub fn write_artifacts(dir: &Path, variant: &str, runs: &[RunArtifacts]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let safe = variant.replace(['/', ' '], "_");
    if let Some(first) = runs.first() {
        first.frame.write_csv(create(&dir.join(format!("frame_{safe}.csv")))?)?;
    }
    for run in runs {
        let tag = format!("{safe}_{}", file_tag(run.report.initial_state));
        run.history.write_csv(create(&dir.join(format!("history_{tag}.csv")))?)?;
        run.naive.write_csv(create(&dir.join(format!("naive_{tag}.csv")))?)?;
        run.advanced.write_csv(create(&dir.join(format!("advanced_{tag}.csv")))?)?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
