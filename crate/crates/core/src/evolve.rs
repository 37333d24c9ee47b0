//! Time-ordered propagation of `H(t) + ε·δH(t)` with per-step
//! renormalization.

use std::io::Write;

use crate::error::{arg, Error, Result};
use crate::matlin::{c, mat_exp, ComplexMatrix, ComplexVector, C64};
use crate::models::HamiltonianPath;
use crate::spectral::SpectralFrame;

#[derive(Clone, Debug, PartialEq)]
pub struct StateHistory {
    pub times: Vec<f64>,
    /// Unit-norm states.
    pub states: Vec<ComplexVector>,
    /// Accumulated `log‖ψ(t)‖` of the unnormalized state.
    pub log_norm: Vec<f64>,
    /// Instantaneous-eigenbasis coefficients, empty until extracted.
    pub coeffs: Vec<Vec<C64>>,
    pub populations: Vec<Vec<f64>>,
}

impl StateHistory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ComplexVector {
        &self.states[self.len() - 1]
    }

    pub fn final_populations(&self) -> &[f64] {
        &self.populations[self.len() - 1]
    }

    /// Population of `branch` at every output time.
    pub fn population_of(&self, branch: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[branch]).collect()
    }

    /// `t`, `Re/Im ψ̂ₙ`, `log_norm`, then `pₙ` when populations are present.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.states.first().map_or(0, ComplexVector::dim);
        let with_pops = self.populations.len() == self.len();
        let mut header = vec!["t".to_string()];
        for b in 0..n {
            header.push(format!("re_psi_{b}"));
            header.push(format!("im_psi_{b}"));
        }
        header.push("log_norm".into());
        if with_pops {
            header.extend((0..n).map(|b| format!("p_{b}")));
        }
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            for z in self.states[k].iter() {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            row.push(self.log_norm[k].to_string());
            if with_pops {
                row.extend(self.populations[k].iter().map(f64::to_string));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Integrates over the whole path domain.
pub fn propagate(
    path: &HamiltonianPath,
    psi0: &ComplexVector,
    steps: usize,
    outputs: usize,
) -> Result<StateHistory> {
    let (a, b) = path.domain();
    propagate_span(path, psi0, a, b, steps, outputs)
}

/// Midpoint exponential scheme `ψ ← exp(−i·H̄(t + dt/2)·dt)·ψ` on
/// `[t_start, t_end]`, recording `outputs` evenly spaced states including
/// both ends.
pub fn propagate_span(
    path: &HamiltonianPath,
    psi0: &ComplexVector,
    t_start: f64,
    t_end: f64,
    steps: usize,
    outputs: usize,
) -> Result<StateHistory> {
    if outputs < 2 || steps < outputs - 1 {
        return arg(format!(
            "need steps >= outputs - 1 and outputs >= 2 (steps = {steps}, outputs = {outputs})"
        ));
    }
    if psi0.dim() != path.dim() {
        return Err(Error::DimensionMismatch {
            expected: path.dim(),
            found: psi0.dim(),
        });
    }
    if !(t_end > t_start) {
        return arg(format!("empty time span [{t_start}, {t_end}]"));
    }
    path.sample_h(t_start)?;
    path.sample_h(t_end)?;
    let Some(mut psi) = psi0.normalized() else {
        return arg("initial state is zero");
    };
    let mut log_norm = psi0.norm().ln();
    let dt = (t_end - t_start) / steps as f64;
    let step_of = |k: usize| k * steps / (outputs - 1);

    let mut hist = StateHistory {
        times: Vec::with_capacity(outputs),
        states: Vec::with_capacity(outputs),
        log_norm: Vec::with_capacity(outputs),
        coeffs: Vec::new(),
        populations: Vec::new(),
    };
    hist.times.push(t_start);
    hist.states.push(psi.clone());
    hist.log_norm.push(log_norm);
    let mut next_out = 1;
    for j in 0..steps {
        let tm = t_start + (j as f64 + 0.5) * dt;
        let gen = path.eval_total(tm).scale(c(0.0, -dt));
        let step = mat_exp(&gen)?;
        let raw = &step * &psi;
        let n = raw.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Magnitude { norm: n });
        }
        psi = raw.scale(c(1.0 / n, 0.0));
        log_norm += n.ln();
        if j + 1 == step_of(next_out) {
            let t = if next_out == outputs - 1 {
                t_end
            } else {
                t_start + (j + 1) as f64 * dt
            };
            hist.times.push(t);
            hist.states.push(psi.clone());
            hist.log_norm.push(log_norm);
            next_out += 1;
        }
    }
    Ok(hist)
}

/// [`propagate`] at `steps·refine` steps on the same output grid.
pub fn reference_propagate(
    path: &HamiltonianPath,
    psi0: &ComplexVector,
    steps: usize,
    outputs: usize,
    refine: usize,
) -> Result<StateHistory> {
    if refine == 0 {
        return arg("refine must be >= 1");
    }
    propagate(path, psi0, steps * refine, outputs)
}

/// Fills `coeffs` and `populations` from `c = U⁻¹(t)·ψ̂(t)`. Output times
/// must sit on the frame grid unless `interpolate` is set, in which case
/// `U⁻¹` is interpolated linearly between neighbouring grid points.
pub fn extract_populations(
    frame: &SpectralFrame,
    history: &StateHistory,
    interpolate: bool,
) -> Result<StateHistory> {
    let mut out = history.clone();
    out.coeffs.clear();
    out.populations.clear();
    for (&t, psi) in history.times.iter().zip(&history.states) {
        let inv = match frame.index_of(t) {
            Some(k) => frame.inverse_frames[k].clone(),
            None if interpolate => interpolated_inverse(frame, t)?,
            None => {
                return arg(format!(
                    "history time {t} is not on the frame grid (enable interpolation)"
                ))
            }
        };
        if psi.dim() != inv.dim() {
            return Err(Error::DimensionMismatch {
                expected: inv.dim(),
                found: psi.dim(),
            });
        }
        let coeffs = inv.mul_vec(psi);
        let (cf, pops) = normalized_coefficients(coeffs.as_slice());
        out.coeffs.push(cf);
        out.populations.push(pops);
    }
    Ok(out)
}

pub(crate) fn normalized_coefficients(raw: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let total: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    let s = total.sqrt();
    let cf: Vec<C64> = raw.iter().map(|z| z / s).collect();
    let mut pops: Vec<f64> = cf.iter().map(|z| z.norm_sqr()).collect();
    let sum: f64 = pops.iter().sum();
    pops.iter_mut().for_each(|p| *p /= sum);
    (cf, pops)
}

fn interpolated_inverse(frame: &SpectralFrame, t: f64) -> Result<ComplexMatrix> {
    let (t0, t1) = (frame.times[0], frame.times[frame.len() - 1]);
    if t < t0 || t > t1 {
        return arg(format!("t = {t} outside frame grid [{t0}, {t1}]"));
    }
    let j = frame
        .times
        .partition_point(|&x| x <= t)
        .clamp(1, frame.len() - 1);
    let w = (t - frame.times[j - 1]) / (frame.times[j] - frame.times[j - 1]);
    Ok(&frame.inverse_frames[j - 1].scale(c(1.0 - w, 0.0)) + &frame.inverse_frames[j].scale(c(w, 0.0)))
}

/// Propagation followed by population extraction on `frame`.
pub fn simulate(
    path: &HamiltonianPath,
    frame: &SpectralFrame,
    psi0: &ComplexVector,
    steps: usize,
    outputs: usize,
) -> Result<StateHistory> {
    let hist = propagate(path, psi0, steps, outputs)?;
    extract_populations(frame, &hist, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::I;
    use crate::models::PathKind;

    fn constant(h: ComplexMatrix, t: f64) -> HamiltonianPath {
        HamiltonianPath::new(PathKind::SampledTable {
            times: vec![0.0, t],
            matrices: vec![h.clone(), h],
        })
        .unwrap()
    }

    fn v(re: &[f64]) -> ComplexVector {
        ComplexVector::new(re.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi0 = v(&[0.6, 0.8]);
        let h = propagate(&constant(ComplexMatrix::zeros(2), 1.0), &psi0, 50, 2).unwrap();
        assert!(h.final_state().max_abs_diff(&psi0) < 1e-15);
        assert_eq!(h.log_norm[1], 0.0);
    }

    #[test]
    fn diagonal_gain_and_loss() {
        let path = constant(ComplexMatrix::diag(&[I, -I]), 1.0);
        let s = 0.5f64.sqrt();
        let h = propagate(&path, &v(&[s, s]), 100, 11).unwrap();
        let f = crate::spectral::build_frame(&path, 100).unwrap();
        let h = extract_populations(&f, &h, false).unwrap();
        // Amplitudes e^{±t}: p₊ = e²/(e² + e⁻²) at t = 1.
        let e2 = 2f64.exp();
        let want = e2 / (e2 + 1.0 / e2);
        assert!((h.final_populations()[0] - want).abs() < 1e-12);
        assert!((h.final_populations()[0] - 0.98201).abs() < 1e-5);
        assert!((h.log_norm[10] - ((e2 + 1.0 / e2) / 2.0).sqrt().ln()).abs() < 1e-12);
        assert_eq!(h.times.len(), 11);
        assert!((h.times[5] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn landau_zener_probability() {
        let path = HamiltonianPath::landau_zener(0.5, 0.25, 160.0).unwrap();
        let frame = crate::spectral::build_frame(&path, 1600).unwrap();
        // Ground state at t = −80 is the lower eigenvalue.
        let ground = if frame.lambdas[0][0].re < frame.lambdas[0][1].re { 0 } else { 1 };
        let psi0 = frame.frames[0].column(ground);
        let h = simulate(&path, &frame, &psi0, 64000, 161).unwrap();
        let excited = h.final_populations()[1 - ground];
        let p_lz = (-2.0 * std::f64::consts::PI * 0.0625 / 0.5).exp();
        assert!((p_lz - 0.45594).abs() < 1e-5);
        assert!((excited - p_lz).abs() / p_lz < 0.05, "{excited}");
        assert!(h.log_norm.iter().all(|l| l.abs() < 1e-9));
    }

    #[test]
    fn second_order_convergence() {
        let path = HamiltonianPath::sampled(
            vec![0.0, 1.0, 2.0],
            vec![
                ComplexMatrix::from_rows(&[vec![c(0.3, 0.2), c(1.0, 0.0)], vec![c(0.5, 0.0), c(-0.2, -0.1)]]).unwrap(),
                ComplexMatrix::from_rows(&[vec![c(-0.4, 0.1), c(0.7, 0.3)], vec![c(0.2, -0.2), c(0.6, 0.0)]]).unwrap(),
                ComplexMatrix::from_rows(&[vec![c(0.1, -0.3), c(0.2, 0.0)], vec![c(1.0, 0.1), c(-0.5, 0.2)]]).unwrap(),
            ],
        )
        .unwrap();
        let psi0 = v(&[1.0, 0.5]);
        let run = |refine| reference_propagate(&path, &psi0, 40, 2, refine).unwrap();
        let (r1, r2, r4) = (run(1), run(2), run(4));
        let e1 = r1.final_state().max_abs_diff(r2.final_state());
        let e2 = r2.final_state().max_abs_diff(r4.final_state());
        let ratio = e1 / e2;
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
        assert_eq!(run(1), propagate(&path, &psi0, 40, 2).unwrap());
    }

    #[test]
    fn composition_over_halves() {
        let path = HamiltonianPath::landau_zener(0.5, 0.25, 20.0).unwrap();
        let psi0 = v(&[1.0, 2.0]);
        let full = propagate_span(&path, &psi0, -10.0, 10.0, 2000, 2).unwrap();
        let first = propagate_span(&path, &psi0, -10.0, 0.0, 1000, 2).unwrap();
        let second = propagate_span(&path, first.final_state(), 0.0, 10.0, 1000, 2).unwrap();
        assert!(full.final_state().max_abs_diff(second.final_state()) < 1e-9);
        let ln = first.log_norm[1] + second.log_norm[1] - first.final_state().norm().ln();
        assert!((full.log_norm[1] - ln).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let path = constant(ComplexMatrix::zeros(2), 1.0);
        assert!(propagate(&path, &ComplexVector::zeros(2), 10, 2).is_err());
        assert!(propagate(&path, &v(&[1.0, 0.0]), 10, 1).is_err());
        assert!(propagate(&path, &v(&[1.0, 0.0, 0.0]), 10, 2).is_err());
        let big = constant(ComplexMatrix::diag(&[c(1e5, 0.0), c(0.0, 0.0)]), 1.0);
        assert!(matches!(
            propagate(&big, &v(&[1.0, 0.0]), 10, 2),
            Err(Error::Magnitude { .. })
        ));
    }

    #[test]
    fn basis_alignment_and_symmetric_superposition() {
        let path = constant(ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]), 1.0);
        let frame = crate::spectral::build_frame(&path, 100).unwrap();
        let s = 0.5f64.sqrt();
        for (psi, want) in [(v(&[1.0, 0.0]), [1.0, 0.0]), (v(&[s, s]), [0.5, 0.5])] {
            let hist = StateHistory {
                times: vec![0.0],
                states: vec![psi],
                log_norm: vec![0.0],
                coeffs: vec![],
                populations: vec![],
            };
            let got = extract_populations(&frame, &hist, false).unwrap();
            assert!((got.populations[0][0] - want[0]).abs() < 1e-15);
            assert!((got.populations[0][1] - want[1]).abs() < 1e-15);
        }
        let off_grid = StateHistory {
            times: vec![0.0055],
            states: vec![v(&[1.0, 0.0])],
            log_norm: vec![0.0],
            coeffs: vec![],
            populations: vec![],
        };
        assert!(extract_populations(&frame, &off_grid, false).is_err());
        assert!(extract_populations(&frame, &off_grid, true).is_ok());
    }

    #[test]
    fn csv_columns() {
        let path = constant(ComplexMatrix::zeros(2), 1.0);
        let frame = crate::spectral::build_frame(&path.clone(), 100);
        assert!(frame.is_err(), "degenerate spectrum has no W1");
        let h = propagate(&path, &v(&[1.0, 0.0]), 10, 3).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_psi_0,im_psi_0,re_psi_1,im_psi_1,log_norm\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
