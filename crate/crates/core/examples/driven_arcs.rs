//! A weak fast drive added to the open arcs: simulation against the naive and
//! advanced predictions, with the per-term magnitudes of the latter.

use nhslow::bench::{preset, run::analyze, Branch, RunSettings};

fn main() -> nhslow::Result<()> {
    let settings = RunSettings::default();
    let driven = preset("fig5")?;
    for v in &driven.variants {
        let path = driven.path(v)?;
        let quiet = driven.noiseless().path(v)?;
        let runs = analyze(&path, &settings, &[Branch::MINUS], v.name, v.direction)?;
        let base = analyze(&quiet, &settings, &[Branch::MINUS], v.name, v.direction)?;
        let r = &runs[0];
        let last = r.report.last_switch();
        println!("{} (epsilon = {:e})", v.name, r.report.advanced_epsilon);
        println!(
            "  last switch: driven sim {:.4}T adv {:.4}T   undriven sim {:.4}T",
            last.simulation.unwrap_or(f64::NAN) / 500.0,
            last.advanced.unwrap_or(f64::NAN) / 500.0,
            base[0].report.last_switch().simulation.unwrap_or(f64::NAN) / 500.0,
        );
        let k = r.advanced.len() / 2;
        println!("  ln|term| at t = {:.0}: {:?}", r.advanced.times[k], r.advanced.term_log_norms[k]);
        for (i, t) in r.history.times.iter().enumerate().step_by(100) {
            let a = r.advanced.population_of(0);
            let n = r.naive.population_of(0);
            let j = (t / r.frame.step()).round() as usize;
            println!(
                "  t = {t:6.1}  p+ sim {:.4}  naive {:.4}  adv {:.4}",
                r.history.populations[i][0], n[j], a[j]
            );
        }
    }
    Ok(())
}
