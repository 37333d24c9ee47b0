//! Landau-Zener sweep: the simulated excited population against
//! exp(-2 pi eta^2 / lambda).

use nhslow::evolve::simulate;
use nhslow::models::HamiltonianPath;
use nhslow::spectral::build_frame;

fn main() -> nhslow::Result<()> {
    let (slope, eta, window) = (0.5, 0.25, 160.0);
    let path = HamiltonianPath::landau_zener(slope, eta, window)?;
    let frame = build_frame(&path, 4000)?;
    let exact = (-2.0 * std::f64::consts::PI * eta * eta / slope).exp();

    // Start in the branch that is the ground state at t = -window/2.
    let ground = if frame.lambdas[0][0].re < frame.lambdas[0][1].re { 0 } else { 1 };
    for steps in [4000, 16000, 64000] {
        let psi0 = frame.frames[0].column(ground);
        let h = simulate(&path, &frame, &psi0, steps, 201)?;
        let p = h.final_populations()[1 - ground];
        println!(
            "steps {steps:>6}: P_excited = {p:.5}  exact = {exact:.5}  rel err = {:.2e}",
            (p - exact).abs() / exact
        );
    }
    Ok(())
}
