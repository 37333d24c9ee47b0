//! Closed loops traversed both ways: which loops convert chirally.

use nhslow::bench::{run_preset, RunSettings};

fn main() -> nhslow::Result<()> {
    let settings = RunSettings::default();
    for name in ["fig3", "fig4", "fig6", "fig7", "ep-chiral", "fig8"] {
        let run = run_preset(name, &settings)?;
        println!("{name}: {}", run.report.description);
        for v in &run.report.chirality {
            println!(
                "  start {}: cw -> {}  ccw -> {}  chiral sim/naive/adv = {}/{}/{}",
                v.cw.initial_state,
                v.cw.winners.simulation,
                v.ccw.winners.simulation,
                v.chiral.simulation,
                v.chiral.naive,
                v.chiral.advanced,
            );
            if let (Some(a), Some(b)) = (v.cw.last_switch().simulation, v.ccw.last_switch().simulation) {
                println!("    last switch cw {:.3}T  ccw {:.3}T", a / 500.0, b / 500.0);
            }
        }
    }
    Ok(())
}
