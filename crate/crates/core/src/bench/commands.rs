use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::classify::{classify_endpoint_fastest_with, detect_switch_times, winner};
use super::config::{config_variants, run_config, Config};
use super::presets::run_preset;
use super::report::{Branch, Direction};
use super::run::{classify_frame, create, file_tag, write_json, Classification, RunSettings};
use super::sweep::{run_sweep, write_sweep_csv, Axis};
use crate::error::Result;
use crate::evolve::simulate;
use crate::predict::{advanced_series_with, eigenbasis_coefficients, naive_series_with, Method};
use crate::spectral::build_frame;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    PredictNaive,
    PredictAdvanced,
    Classify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::PredictNaive => "predict-naive",
            Command::PredictAdvanced => "predict-advanced",
            Command::Classify => "classify",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodRun {
    pub variant: String,
    pub direction: Direction,
    pub initial_state: Branch,
    pub winner: Branch,
    pub final_populations: Vec<f64>,
    pub switch_times: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodReport {
    pub command: &'static str,
    pub method: &'static str,
    pub epsilon: Option<f64>,
    pub advanced_epsilon: Option<f64>,
    pub settings: RunSettings,
    pub runs: Vec<MethodRun>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyEntry {
    pub variant: String,
    pub direction: Direction,
    #[serde(flatten)]
    pub classification: Classification,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub command: &'static str,
    pub settings: RunSettings,
    pub variants: Vec<ClassifyEntry>,
}

/// Runs one single-method command on a config and writes its CSVs and
/// `report.json` into `out`. `classify` is strict: an indeterminate endpoint
/// is reported as an error after the report is written.
pub fn run_command(cmd: Command, cfg: &Config, out: &Path) -> Result<()> {
    let settings = cfg.settings();
    settings.validate()?;
    let inits = cfg.initial_states()?;
    std::fs::create_dir_all(out)?;
    let variants = config_variants(cfg)?;

    if cmd == Command::Classify {
        let mut entries = Vec::new();
        let mut strict = None;
        for (name, direction, path) in &variants {
            let frame = build_frame(path, settings.grid)?;
            frame.write_csv(create(&out.join(format!("frame_{name}.csv")))?)?;
            if let Err(e) = classify_endpoint_fastest_with(&frame, settings.y, settings.y_floor) {
                strict.get_or_insert(e);
            }
            entries.push(ClassifyEntry {
                variant: name.clone(),
                direction: *direction,
                classification: classify_frame(path, &frame, &settings),
            });
        }
        write_json(
            &out.join("report.json"),
            &ClassifyReport {
                command: cmd.as_str(),
                settings,
                variants: entries,
            },
        )?;
        return strict.map_or(Ok(()), Err);
    }

    let mut runs = Vec::new();
    let mut advanced_epsilon = None;
    for (name, direction, path) in &variants {
        let frame = build_frame(path, settings.grid)?;
        frame.write_csv(create(&out.join(format!("frame_{name}.csv")))?)?;
        for &init in &inits {
            let psi0 = frame.frames[0].column(init.0);
            let tag = format!("{name}_{}", file_tag(init));
            let (times, pops) = match cmd {
                Command::Simulate => {
                    let h = simulate(path, &frame, &psi0, settings.steps, settings.outputs)?;
                    h.write_csv(create(&out.join(format!("history_{tag}.csv")))?)?;
                    (h.times, h.populations)
                }
                _ => {
                    let phi0 = eigenbasis_coefficients(&frame, &psi0)?;
                    let opts = settings.predict_options();
                    let s = if cmd == Command::PredictNaive {
                        naive_series_with(&frame, &phi0, &opts)?
                    } else {
                        let pert = settings.advanced_perturbation(path);
                        advanced_epsilon = Some(pert.epsilon);
                        advanced_series_with(&frame, &phi0, &pert, &opts)?
                    };
                    let prefix = s.method.as_str();
                    s.write_csv(create(&out.join(format!("{prefix}_{tag}.csv")))?)?;
                    (s.times, s.populations)
                }
            };
            let last = pops.last().cloned().unwrap_or_default();
            let w = winner(&last);
            let pw: Vec<f64> = pops.iter().map(|p| p[w]).collect();
            runs.push(MethodRun {
                variant: name.clone(),
                direction: *direction,
                initial_state: init,
                winner: Branch(w),
                final_populations: last,
                switch_times: detect_switch_times(&times, &pw, 0.5),
            });
        }
    }
    let method = match cmd {
        Command::Simulate => "simulation",
        Command::PredictNaive => Method::Naive.as_str(),
        _ => Method::Advanced.as_str(),
    };
    write_json(
        &out.join("report.json"),
        &MethodReport {
            command: cmd.as_str(),
            method,
            epsilon: cfg.perturbation.as_ref().map(|p| p.epsilon),
            advanced_epsilon,
            settings,
            runs,
        },
    )
}

/// Prepends `"command": name` to a serializable object.
fn with_command<T: Serialize>(name: &str, value: &T) -> Result<Value> {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(name.into()));
    if let Value::Object(rest) = serde_json::to_value(value)? {
        map.extend(rest);
    }
    Ok(Value::Object(map))
}

pub fn run_preset_command(name: &str, settings: &RunSettings, out: &Path) -> Result<()> {
    let run = run_preset(name, settings)?;
    for (variant, runs) in &run.artifacts {
        super::run::write_artifacts(out, variant, runs)?;
    }
    write_json(&out.join("report.json"), &with_command("preset", &run.report)?)
}

/// Full analysis of a config (all methods, optional chirality).
pub fn run_config_command(cfg: &Config, out: &Path) -> Result<()> {
    let run = run_config(cfg)?;
    for (variant, runs) in &run.artifacts {
        super::run::write_artifacts(out, variant, runs)?;
    }
    write_json(&out.join("report.json"), &with_command("run", &run.report)?)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    axes: Map<String, Value>,
    points: usize,
    rows: usize,
    failures: usize,
    csv: &'a str,
}

pub fn run_sweep_command(base: &Value, axes: &[Axis], out: &Path) -> Result<()> {
    let rows = run_sweep(base, axes)?;
    std::fs::create_dir_all(out)?;
    write_sweep_csv(&out.join("sweep.csv"), axes, &rows)?;
    let summary = SweepSummary {
        axes: axes
            .iter()
            .map(|a| (a.key.clone(), Value::Array(a.values.clone())))
            .collect(),
        points: rows.iter().map(|r| r.point).max().map_or(0, |p| p + 1),
        rows: rows.len(),
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        csv: "sweep.csv",
    };
    write_json(&out.join("report.json"), &with_command("sweep", &summary)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LZ: &str = r#"{
        "trajectory": {"kind": "landau_zener", "slope": 0.5, "coupling": 0.25, "window": 40.0},
        "integrator": {"steps": 4000, "outputs": 101},
        "frame": {"grid": 400}
    }"#;

    fn keys(v: &Value) -> Vec<String> {
        v.as_object().unwrap().keys().cloned().collect()
    }

    #[test]
    fn single_method_commands_write_reports() {
        let cfg = Config::from_json(LZ).unwrap();
        for cmd in [Command::Simulate, Command::PredictNaive, Command::PredictAdvanced] {
            let dir = tempfile::tempdir().unwrap();
            run_command(cmd, &cfg, dir.path()).unwrap();
            let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
            let v: Value = serde_json::from_str(&text).unwrap();
            assert_eq!(keys(&v)[0], "command");
            assert_eq!(v["command"], cmd.as_str());
            assert_eq!(v["runs"].as_array().unwrap().len(), 2);
            assert!(dir.path().join("frame_run.csv").exists());
        }
    }

    #[test]
    fn classify_is_strict_on_hermitian_paths() {
        let cfg = Config::from_json(LZ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_command(Command::Classify, &cfg, dir.path()).unwrap_err();
        assert!(err.is_physics());
        let v: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(keys(&v), ["command", "settings", "variants"]);
        assert!(v["variants"][0]["endpoint_fastest"].is_null());
    }
}
