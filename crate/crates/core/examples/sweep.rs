//! Sweep the loop centre along g: chirality switches off once the loop moves
//! away from the balanced-gain line.

use nhslow::bench::{run_sweep, Axis};
use serde_json::json;

fn main() -> nhslow::Result<()> {
    let base = json!({
        "trajectory": {"kind": "circle", "delta0": 0.0, "g0": 0.5, "radius": 0.3,
                       "total_time": 500.0, "omega": -0.012566370614359173, "phi": 0.0},
        "perturbation": {"epsilon": 1e-4},
        "integrator": {"steps": 20000, "outputs": 201, "initial_states": ["psi-"]},
        "frame": {"grid": 2000},
        "classifier": {"both_directions": true}
    });
    let axes: Vec<Axis> = vec!["trajectory.delta0=0.0,0.25,0.5".parse()?, "trajectory.g0=0.3,0.5,0.7".parse()?];
    for row in run_sweep(&base, &axes)? {
        println!(
            "delta0 = {:<5} g0 = {:<5} {:<10} winner {:<5} chiral {:?} {}",
            row.values[0].to_string(),
            row.values[1].to_string(),
            row.label,
            row.winners[0],
            row.chiral.map(|c| c[0]),
            row.error.unwrap_or_default(),
        );
    }
    Ok(())
}
