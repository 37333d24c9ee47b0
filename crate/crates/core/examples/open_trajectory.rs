//! Open arcs near the EP: the most growing state wins on one arc and loses
//! to the end-point fastest growing state on the other.

use nhslow::bench::{run_preset, RunSettings};

fn main() -> nhslow::Result<()> {
    let settings = RunSettings::default();
    for name in ["fig1", "fig2"] {
        let run = run_preset(name, &settings)?;
        let t = 500.0;
        println!("{name}: {}", run.report.description);
        for r in &run.report.runs {
            let last = r.last_switch();
            println!(
                "  start {}  most growing {:?}  end-point fastest {:?}",
                r.initial_state,
                r.most_growing.map(|b| b.to_string()),
                r.endpoint_fastest.map(|b| b.to_string()),
            );
            println!(
                "    winners sim/naive/adv = {}/{}/{}  last switch sim {:?} adv {:?}  naive crossings {:?}",
                r.winners.simulation,
                r.winners.naive,
                r.winners.advanced,
                last.simulation.map(|s| s / t),
                last.advanced.map(|s| s / t),
                r.naive_crossings.iter().map(|s| s / t).collect::<Vec<_>>(),
            );
        }
    }
    Ok(())
}
