pub mod classify;
pub mod commands;
pub mod config;
pub mod presets;
pub mod report;
pub mod run;
pub mod sweep;

pub use classify::{
    classify_endpoint_fastest, classify_most_growing, detect_switch_times, last_switch,
    naive_crossing_times, EndpointVerdict, MostGrowing,
};
pub use config::{config_variants, run_config, Config, Overrides};
pub use presets::{preset, run_preset, Preset, PresetRun, Report, PRESET_NAMES};
pub use report::{chirality, Branch, ChiralityVerdict, ConversionReport, Direction, PerMethod};
pub use run::{analyze, RunArtifacts, RunSettings};
pub use sweep::{run_sweep, write_sweep_csv, Axis, SweepRow};
