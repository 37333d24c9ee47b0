use std::f64::consts::PI;

use nhslow::bench::presets::{fig1_trajectory, fig2_trajectory};
use nhslow::bench::RunSettings;
use nhslow::models::{HamiltonianPath, TrajectorySpec};
use nhslow::predict::{advanced_series_with, eigenbasis_coefficients, naive_series, PredictOptions};
use nhslow::spectral::build_frame;
use proptest::prelude::*;

fn winner(p: &[f64]) -> usize {
    if p[0] > p[1] {
        0
    } else {
        1
    }
}

#[test]
fn phase_integral_is_additive_over_halves() {
    let full = fig1_trajectory();
    let t = full.total_time;
    let first = TrajectorySpec { total_time: t / 2.0, ..full };
    let second = TrajectorySpec {
        total_time: t / 2.0,
        phi: full.phi + full.omega * t / 2.0,
        ..full
    };
    let f = build_frame(&HamiltonianPath::circle(full).unwrap(), 5000).unwrap();
    let a = build_frame(&HamiltonianPath::circle(first).unwrap(), 2500).unwrap();
    let b = build_frame(&HamiltonianPath::circle(second).unwrap(), 2500).unwrap();
    let mid = &f.lambdas[2500];
    for n in 0..2 {
        // Branch of the second half that continues branch n.
        let m = (0..2)
            .min_by(|&i, &j| (b.lambdas[0][i] - mid[n]).norm().total_cmp(&(b.lambdas[0][j] - mid[n]).norm()))
            .unwrap();
        let whole = f.lambda_integrals[5000][n];
        let parts = a.lambda_integrals[2500][n] + b.lambda_integrals[2500][m];
        assert!((whole - parts).norm() < 1e-10, "{whole} vs {parts}");
    }
}

#[test]
fn early_restarts_reproduce_the_naive_winner_on_fig2() {
    let path = HamiltonianPath::circle(fig2_trajectory()).unwrap();
    let f = build_frame(&path, 5000).unwrap();
    let pert = RunSettings::default().advanced_perturbation(&path);
    let t = f.duration();
    for init in [0, 1] {
        let phi0 = eigenbasis_coefficients(&f, &f.frames[0].column(init)).unwrap();
        let naive = naive_series(&f, &phi0).unwrap();
        let early = PredictOptions {
            t1_window: Some((0.0, 0.2 * t)),
            ..Default::default()
        };
        let adv = advanced_series_with(&f, &phi0, &pert, &early).unwrap();
        assert_eq!(winner(adv.final_populations()), winner(naive.final_populations()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Reversing the loop mirrors the spectrum in time: Im Λ(T) of the two
    /// directions carry the same set of values.
    #[test]
    fn reversed_loop_has_mirrored_growth(delta0 in -0.6f64..0.6, g0 in 0.2f64..0.45, phi in 0.0..2.0 * PI) {
        let cw = TrajectorySpec { delta0, g0, radius: 0.3, total_time: 200.0, omega: -2.0 * PI / 200.0, phi };
        let a = build_frame(&HamiltonianPath::circle(cw).unwrap(), 1000).unwrap();
        let b = build_frame(&HamiltonianPath::circle(cw.reversed()).unwrap(), 1000).unwrap();
        let mut x: Vec<f64> = a.lambda_integrals[1000].iter().map(|z| z.im).collect();
        let mut y: Vec<f64> = b.lambda_integrals[1000].iter().map(|z| z.im).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-6 * (1.0 + p.abs()), "{x:?} vs {y:?}");
        }
    }
}
