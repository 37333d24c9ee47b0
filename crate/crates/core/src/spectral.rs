//! Instantaneous eigenframes along a path, with branch tracking and the
//! first-order non-adiabatic correction.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::matlin::{c, eig_general, mat_inv, ComplexMatrix, C64, I};
use crate::models::HamiltonianPath;

/// Two candidate overlaps closer than this make a branch match ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-3;
/// Smallest eigenvalue gap accepted when dividing by `λₘ − λₙ`.
pub const MIN_GAP: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectralFrame {
    pub times: Vec<f64>,
    /// `lambdas[k][n]`, branch-tracked.
    pub lambdas: Vec<Vec<C64>>,
    pub frames: Vec<ComplexMatrix>,
    pub inverse_frames: Vec<ComplexMatrix>,
    /// `Λₙ(t_k) = ∫ λₙ dt` from the first grid point.
    pub lambda_integrals: Vec<Vec<C64>>,
    pub x1: Vec<ComplexMatrix>,
    pub w1: Vec<ComplexMatrix>,
    /// `λₙ⁽¹⁾ = −X⁽¹⁾ₙₙ`
    pub lambda1: Vec<Vec<C64>>,
    pub lambda1_integrals: Vec<Vec<C64>>,
    /// Largest `‖H − U·D·U⁻¹‖_F / ‖H‖_F` over the grid.
    pub reconstruction_residual: f64,
}

impl SpectralFrame {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.lambdas.first().map_or(0, Vec::len)
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn duration(&self) -> f64 {
        self.times[self.len() - 1] - self.times[0]
    }

    /// Grid index of `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let t0 = self.times[0];
        let h = self.step();
        let k = ((t - t0) / h).round();
        if k < 0.0 || k as usize >= self.len() {
            return None;
        }
        let k = k as usize;
        ((self.times[k] - t).abs() <= 1e-9 * self.duration().max(1.0)).then_some(k)
    }

    /// Phase integrals used by the predictors, optionally with the
    /// first-order eigenvalue corrections folded in.
    pub fn phase_integrals(&self, include_lambda1: bool) -> Vec<Vec<C64>> {
        if !include_lambda1 {
            return self.lambda_integrals.clone();
        }
        self.lambda_integrals
            .iter()
            .zip(&self.lambda1_integrals)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect()
    }

    /// Writes `t`, then `Re/Im λₙ` and `Re/Im Λₙ` for every branch.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.dim();
        let mut header = vec!["t".to_string()];
        for b in 0..n {
            header.push(format!("re_lambda_{b}"));
            header.push(format!("im_lambda_{b}"));
        }
        for b in 0..n {
            header.push(format!("re_Lambda_{b}"));
            header.push(format!("im_Lambda_{b}"));
        }
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.times[k].to_string()];
            for z in &self.lambdas[k] {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            for z in &self.lambda_integrals[k] {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eigendecomposes `H(t_k)` on `grid_points + 1` evenly spaced times and
/// fills every derived quantity.
pub fn build_frame(path: &HamiltonianPath, grid_points: usize) -> Result<SpectralFrame> {
    if grid_points < 100 {
        return arg(format!("grid must have at least 100 intervals, got {grid_points}"));
    }
    let (a, b) = path.domain();
    let h = (b - a) / grid_points as f64;
    let times: Vec<f64> = (0..=grid_points)
        .map(|k| if k == grid_points { b } else { a + k as f64 * h })
        .collect();
    let bare = path.without_perturbation();
    let decomps = times
        .par_iter()
        .map(|&t| {
            let hm = bare.sample_h(t)?;
            let e = eig_general(&hm).map_err(|err| match err {
                Error::NearExceptionalPoint { condition, .. } => Error::NearExceptionalPoint {
                    condition,
                    context: format!("frame at t = {t}"),
                },
                other => other,
            })?;
            Ok((hm, e))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = path.dim();
    let mut lambdas: Vec<Vec<C64>> = Vec::with_capacity(times.len());
    let mut frames: Vec<ComplexMatrix> = Vec::with_capacity(times.len());
    for (k, (_, e)) in decomps.iter().enumerate() {
        if k == 0 {
            lambdas.push(e.values.clone());
            frames.push(e.right_vectors.clone());
            continue;
        }
        let prev = &frames[k - 1];
        let order = match_branches(prev, &e.right_vectors).ok_or(Error::BranchAmbiguity {
            index: k,
            time: times[k],
        })?;
        let mut u = ComplexMatrix::zeros(n);
        let mut vals = vec![c(0.0, 0.0); n];
        for (label, &src) in order.iter().enumerate() {
            let col = e.right_vectors.column(src);
            let overlap = prev.column(label).dot(&col);
            let phase = if overlap.norm() > 0.0 {
                overlap.conj() / overlap.norm()
            } else {
                c(1.0, 0.0)
            };
            u.set_column(label, &col.scale(phase));
            vals[label] = e.values[src];
        }
        lambdas.push(vals);
        frames.push(u);
    }

    let inverse_frames = frames
        .par_iter()
        .map(mat_inv)
        .collect::<Result<Vec<_>>>()?;

    let reconstruction_residual = decomps
        .par_iter()
        .enumerate()
        .map(|(k, (hm, _))| {
            let d = ComplexMatrix::diag(&lambdas[k]);
            let rebuilt = &(&frames[k] * &d) * &inverse_frames[k];
            (hm - &rebuilt).frobenius_norm() / hm.frobenius_norm().max(f64::MIN_POSITIVE)
        })
        .reduce(|| 0.0, f64::max);
    if reconstruction_residual > 1e-8 {
        log::warn!("frame reconstruction residual {reconstruction_residual:.3e} exceeds 1e-8");
    }

    let m = times.len();
    let mut frame = SpectralFrame {
        times,
        lambdas,
        frames,
        inverse_frames,
        lambda_integrals: vec![vec![c(0.0, 0.0); n]; m],
        x1: vec![ComplexMatrix::zeros(n); m],
        w1: vec![ComplexMatrix::zeros(n); m],
        lambda1: vec![vec![c(0.0, 0.0); n]; m],
        lambda1_integrals: vec![vec![c(0.0, 0.0); n]; m],
        reconstruction_residual,
    };
    cumulative_lambda(&mut frame);
    compute_x1(&mut frame);
    compute_w1(&mut frame)?;
    Ok(frame)
}

/// Greedy assignment of new columns to previous labels by decreasing
/// `|⟨prev|new⟩|`. Returns `order[label] = new column`, or `None` when a
/// competing overlap is within [`AMBIGUITY_TOL`] of the chosen one.
fn match_branches(prev: &ComplexMatrix, new: &ComplexMatrix) -> Option<Vec<usize>> {
    let n = prev.dim();
    let pc: Vec<_> = (0..n).map(|j| prev.column(j)).collect();
    let nc: Vec<_> = (0..n).map(|j| new.column(j)).collect();
    let mut overlaps = Vec::with_capacity(n * n);
    for (i, p) in pc.iter().enumerate() {
        for (j, q) in nc.iter().enumerate() {
            overlaps.push((p.dot(q).norm() / (p.norm() * q.norm()), i, j));
        }
    }
    overlaps.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut order = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (pos, &(ov, i, j)) in overlaps.iter().enumerate() {
        if order[i] != usize::MAX || taken[j] {
            continue;
        }
        let contested = overlaps[pos + 1..].iter().any(|&(o, i2, j2)| {
            (i2 == i && !taken[j2] && j2 != j || j2 == j && order[i2] == usize::MAX && i2 != i)
                && ov - o < AMBIGUITY_TOL
        });
        if contested {
            return None;
        }
        order[i] = j;
        taken[j] = true;
    }
    Some(order)
}

fn cumulative(values: &[Vec<C64>], times: &[f64]) -> Vec<Vec<C64>> {
    let n = values.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = vec![c(0.0, 0.0); n];
    out.push(acc.clone());
    for k in 1..values.len() {
        let h = times[k] - times[k - 1];
        for b in 0..n {
            acc[b] += (values[k - 1][b] + values[k][b]) * (h / 2.0);
        }
        out.push(acc.clone());
    }
    out
}

/// Trapezoid-rule `Λₙ(t_k)`, starting from zero.
pub fn cumulative_lambda(frame: &mut SpectralFrame) {
    frame.lambda_integrals = cumulative(&frame.lambdas, &frame.times);
}

/// `X⁽¹⁾ = i·U⁻¹·∂ₜU` with second-order differences.
pub fn compute_x1(frame: &mut SpectralFrame) {
    let m = frame.len();
    let h = frame.step();
    let u = &frame.frames;
    frame.x1 = (0..m)
        .into_par_iter()
        .map(|k| {
            let du = if m < 3 {
                (&u[m - 1] - &u[0]).scale(c(1.0 / h, 0.0))
            } else if k == 0 {
                (&(&u[1].scale(c(4.0, 0.0)) - &u[0].scale(c(3.0, 0.0))) - &u[2])
                    .scale(c(0.5 / h, 0.0))
            } else if k == m - 1 {
                (&(&u[k].scale(c(3.0, 0.0)) - &u[k - 1].scale(c(4.0, 0.0))) + &u[k - 2])
                    .scale(c(0.5 / h, 0.0))
            } else {
                (&u[k + 1] - &u[k - 1]).scale(c(0.5 / h, 0.0))
            };
            (&frame.inverse_frames[k] * &du).scale(I)
        })
        .collect();
}

/// `W⁽¹⁾ₘₙ = X⁽¹⁾ₘₙ / (λₘ − λₙ)` off the diagonal and `λₙ⁽¹⁾ = −X⁽¹⁾ₙₙ`.
pub fn compute_w1(frame: &mut SpectralFrame) -> Result<()> {
    let n = frame.dim();
    let mut w1 = Vec::with_capacity(frame.len());
    let mut lambda1 = Vec::with_capacity(frame.len());
    for k in 0..frame.len() {
        let x = &frame.x1[k];
        let lam = &frame.lambdas[k];
        let mut w = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gap = lam[i] - lam[j];
                if gap.norm() < MIN_GAP {
                    return Err(Error::NearExceptionalPoint {
                        condition: 1.0 / gap.norm(),
                        context: format!("eigenvalue gap {:.3e} at t = {}", gap.norm(), frame.times[k]),
                    });
                }
                w[(i, j)] = x[(i, j)] / gap;
            }
        }
        w1.push(w);
        lambda1.push((0..n).map(|i| -x[(i, i)]).collect());
    }
    frame.lambda1_integrals = cumulative(&lambda1, &frame.times);
    frame.w1 = w1;
    frame.lambda1 = lambda1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PathKind, TrajectorySpec};
    use std::f64::consts::PI;

    fn circle(g0: f64, omega: f64, phi: f64, total_time: f64) -> HamiltonianPath {
        HamiltonianPath::circle(TrajectorySpec {
            delta0: 0.0,
            g0,
            radius: 0.3,
            total_time,
            omega,
            phi,
        })
        .unwrap()
    }

    fn constant(h: ComplexMatrix) -> HamiltonianPath {
        HamiltonianPath::new(PathKind::SampledTable {
            times: vec![0.0, 1.0],
            matrices: vec![h.clone(), h],
        })
        .unwrap()
    }

    #[test]
    fn constant_diagonal_path() {
        let f = build_frame(&constant(ComplexMatrix::diag(&[I, -I])), 100).unwrap();
        for k in 0..f.len() {
            assert_eq!(f.frames[k], ComplexMatrix::identity(2));
            assert_eq!(f.lambdas[k], vec![I, -I]);
            assert_eq!(f.x1[k].max_abs(), 0.0);
            assert_eq!(f.w1[k].max_abs(), 0.0);
            assert!(f.lambda1[k].iter().all(|z| z.norm() == 0.0));
        }
        assert!((f.lambda_integrals[100][0] - I).norm() < 1e-14);
    }

    #[test]
    fn linear_integrand() {
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
        let lambdas: Vec<Vec<C64>> = times.iter().map(|&t| vec![c(t, 0.0)]).collect();
        let l = cumulative(&lambdas, &times);
        assert_eq!(l[0][0], c(0.0, 0.0));
        assert!((l[1000][0].re - 0.5).abs() < 1e-6);
    }

    #[test]
    fn fig1_branches_are_continuous() {
        let f = build_frame(&circle(1.0, -PI / 500.0, 0.4 * PI, 500.0), 5000).unwrap();
        assert!(f.reconstruction_residual < 1e-8);
        let h = f.step();
        for b in 0..2 {
            let rates: Vec<f64> = (1..f.len())
                .map(|k| (f.lambdas[k][b] - f.lambdas[k - 1][b]).norm() / h)
                .collect();
            let max_rate = rates.iter().copied().fold(0.0, f64::max);
            for k in 1..f.len() {
                let jump = (f.lambdas[k][b] - f.lambdas[k - 1][b]).norm();
                assert!(jump < 10.0 * h * max_rate);
                let gap = (f.lambdas[k - 1][0] - f.lambdas[k - 1][1]).norm();
                assert!(jump < 0.5 * gap);
            }
        }
    }

    #[test]
    fn single_ep_loop_swaps_branches() {
        let f = build_frame(&circle(1.0, 2.0 * PI / 500.0, -0.75 * PI, 500.0), 5000).unwrap();
        let last = f.len() - 1;
        assert!((f.lambdas[last][0] - f.lambdas[0][1]).norm() < 1e-6);
        assert!((f.lambdas[last][1] - f.lambdas[0][0]).norm() < 1e-6);
    }

    #[test]
    fn loop_without_ep_returns_to_start() {
        let f = build_frame(&circle(0.5, -2.0 * PI / 500.0, 0.0, 500.0), 5000).unwrap();
        let last = f.len() - 1;
        assert!((f.lambdas[last][0] - f.lambdas[0][0]).norm() < 1e-6);
    }

    #[test]
    fn fig4_loop_is_balanced() {
        for omega in [-2.0 * PI / 500.0, 2.0 * PI / 500.0] {
            let f = build_frame(&circle(0.5, omega, 0.0, 500.0), 5000).unwrap();
            for z in &f.lambda_integrals[f.len() - 1] {
                assert!(z.im.abs() < 2e-3, "{z}");
            }
        }
    }

    #[test]
    fn hermitian_frame_is_unitary_and_x1_hermitian() {
        // The frame turns at ~1 rad per unit time at the crossing; h = 2e-3
        // keeps the central-difference error below 1e-6.
        let f = build_frame(&HamiltonianPath::landau_zener(0.5, 0.25, 40.0).unwrap(), 20000)
            .unwrap();
        for k in 0..f.len() {
            assert!(f.lambdas[k].iter().all(|z| z.im.abs() < 1e-8));
            let u = &f.frames[k];
            let gram = &(&u.adjoint() * u) - &ComplexMatrix::identity(2);
            assert!(gram.frobenius_norm() < 1e-7);
        }
        for k in 1..f.len() - 1 {
            let x = &f.x1[k];
            let err = (x - &x.adjoint()).max_abs();
            assert!(err < 1e-6, "k={k} err={err:e}");
        }
    }

    #[test]
    fn gauge_has_no_phase_jumps() {
        let f = build_frame(&circle(1.0, PI / 500.0, -0.6 * PI, 500.0), 5000).unwrap();
        for k in 1..f.len() {
            for b in 0..2 {
                let ov = f.frames[k - 1].column(b).dot(&f.frames[k].column(b));
                assert!(ov.arg().abs() < 1e-12);
                assert!(ov.re > 0.0);
            }
        }
    }

    #[test]
    fn w1_diagonal_is_zero_and_scales_with_duration() {
        let max_w = |t: f64| {
            let f = build_frame(&circle(1.0, -PI / t, 0.4 * PI, t), 5000).unwrap();
            for w in &f.w1 {
                assert_eq!(w[(0, 0)], c(0.0, 0.0));
                assert_eq!(w[(1, 1)], c(0.0, 0.0));
            }
            f.w1.iter().map(|w| w.max_abs()).fold(0.0, f64::max)
        };
        let w500 = max_w(500.0);
        let w2000 = max_w(2000.0);
        assert!(w500 < 50.0 / 500.0, "{w500}");
        let ratio = w500 / w2000;
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
    }

    #[test]
    fn x1_converges_under_refinement() {
        let path = circle(1.0, -PI / 500.0, 0.4 * PI, 500.0);
        let f1 = build_frame(&path, 1000).unwrap();
        let f2 = build_frame(&path, 2000).unwrap();
        let f4 = build_frame(&path, 4000).unwrap();
        let mut d12 = 0.0f64;
        let mut d24 = 0.0f64;
        for k in 1..1000 {
            d12 = d12.max((&f1.x1[k] - &f2.x1[2 * k]).max_abs());
            d24 = d24.max((&f2.x1[2 * k] - &f4.x1[4 * k]).max_abs());
        }
        // Second order: the 2M→4M change is about a quarter of M→2M.
        assert!(d12 / d24 > 3.0, "{}", d12 / d24);
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let f = build_frame(&constant(ComplexMatrix::diag(&[I, -I])), 100).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,re_lambda_0,im_lambda_0,re_lambda_1,im_lambda_1,re_Lambda_0,im_Lambda_0,re_Lambda_1,im_Lambda_1"
        );
        assert_eq!(lines.count(), 101);
    }

    #[test]
    fn grid_too_coarse() {
        assert!(build_frame(&constant(ComplexMatrix::identity(2)), 10).is_err());
    }
}
