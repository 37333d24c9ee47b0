//! Running a JSON configuration through the full analysis and writing the
//! CSV/JSON artifacts.

use nhslow::bench::{commands::run_config_command, Config};

const CONFIG: &str = r#"{
    "trajectory": {"kind": "circle", "delta0": 0.0, "g0": 0.5, "radius": 0.3,
                   "total_time": 500.0, "omega": -0.012566370614359173, "phi": 0.0},
    "perturbation": {"epsilon": 1e-4},
    "integrator": {"steps": 20000, "outputs": 501},
    "frame": {"grid": 4000},
    "classifier": {"both_directions": true}
}"#;

fn main() -> nhslow::Result<()> {
    let cfg = Config::from_json(CONFIG)?;
    let out = std::env::temp_dir().join("nhslow_custom_config");
    run_config_command(&cfg, &out)?;
    let mut files: Vec<_> = std::fs::read_dir(&out)?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect();
    files.sort();
    println!("wrote into {}:", out.display());
    for f in files {
        println!("  {f}");
    }
    let report = std::fs::read_to_string(out.join("report.json"))?;
    let v: serde_json::Value = serde_json::from_str(&report)?;
    for c in v["chirality"].as_array().into_iter().flatten() {
        println!(
            "start {}: cw -> {}  ccw -> {}  chiral = {}",
            c["cw"]["initial_state"], c["cw"]["winners"]["simulation"], c["ccw"]["winners"]["simulation"],
            c["chiral"]["simulation"]
        );
    }
    Ok(())
}
