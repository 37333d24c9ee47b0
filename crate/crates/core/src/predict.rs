//! Analytical predictions in the instantaneous eigenbasis: the noiseless
//! adiabatic series and its first-order correction in a fast drive.

use std::io::Write;
use std::ops::{Add, Mul};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::evolve::normalized_coefficients;
use crate::matlin::{c, ComplexMatrix, ComplexVector, C64, I};
use crate::models::PerturbationSpec;
use crate::spectral::SpectralFrame;

/// `exp(log_scale)·mantissa` with `|mantissa| = 1`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub log_scale: f64,
    pub mantissa: C64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        log_scale: f64::NEG_INFINITY,
        mantissa: C64 { re: 0.0, im: 0.0 },
    };

    pub fn new(z: C64) -> Self {
        Self::from_parts(0.0, z)
    }

    /// `exp(w)` without evaluating it.
    pub fn exp_of(w: C64) -> Self {
        Self {
            log_scale: w.re,
            mantissa: C64::from_polar(1.0, w.im),
        }
    }

    fn from_parts(log_scale: f64, m: C64) -> Self {
        let r = m.norm();
        if r == 0.0 || log_scale == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            log_scale: log_scale + r.ln(),
            mantissa: m / r,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_scale == f64::NEG_INFINITY
    }

    /// `ln|z|`, `−∞` for zero.
    pub fn log_abs(&self) -> f64 {
        self.log_scale
    }

    /// Plain value; overflows to infinity when the scale is too large.
    pub fn value(&self) -> C64 {
        if self.is_zero() {
            return c(0.0, 0.0);
        }
        self.mantissa * self.log_scale.exp()
    }

    pub fn scale(self, z: C64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.log_scale, self.mantissa * z)
    }
}

impl Add for ScaledComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let s = self.log_scale.max(rhs.log_scale);
        let m = self.mantissa * (self.log_scale - s).exp() + rhs.mantissa * (rhs.log_scale - s).exp();
        Self::from_parts(s, m)
    }
}

impl Mul for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self {
            log_scale: self.log_scale + rhs.log_scale,
            mantissa: self.mantissa * rhs.mantissa,
        }
    }
}

fn sum(items: impl IntoIterator<Item = ScaledComplex>) -> ScaledComplex {
    items.into_iter().fold(ScaledComplex::ZERO, |a, b| a + b)
}

/// `ln‖v‖` of a vector held in scaled form.
fn log_norm(v: &[ScaledComplex]) -> f64 {
    let s = v.iter().map(|z| z.log_scale).fold(f64::NEG_INFINITY, f64::max);
    if s == f64::NEG_INFINITY {
        return s;
    }
    let acc: f64 = v
        .iter()
        .filter(|z| !z.is_zero())
        .map(|z| (2.0 * (z.log_scale - s)).exp())
        .sum();
    s + 0.5 * acc.ln()
}

/// Rescales a scaled vector to an ordinary one with unit norm.
fn to_unit(v: &[ScaledComplex]) -> Vec<C64> {
    let s = v.iter().map(|z| z.log_scale).fold(f64::NEG_INFINITY, f64::max);
    v.iter()
        .map(|z| {
            if z.is_zero() {
                c(0.0, 0.0)
            } else {
                z.mantissa * (z.log_scale - s).exp()
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Advanced,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Advanced => "advanced",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PredictOptions {
    /// Add `∫λₙ⁽¹⁾` to the phase integrals.
    pub include_lambda1: bool,
    /// Restrict the `t₁` integral to `[lo, hi]` (absolute times).
    pub t1_window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSeries {
    pub method: Method,
    pub times: Vec<f64>,
    pub coeffs: Vec<Vec<C64>>,
    pub populations: Vec<Vec<f64>>,
    /// `ln‖term_j‖` for terms 1–5 at each time; `−∞` for absent terms.
    pub term_log_norms: Vec<[f64; 5]>,
}

impl PredictionSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn population_of(&self, branch: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[branch]).collect()
    }

    pub fn final_populations(&self) -> &[f64] {
        &self.populations[self.len() - 1]
    }

    /// `method`, `t`, then `pₙ`; the population columns match the
    /// simulation history CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.populations.first().map_or(0, Vec::len);
        let mut header = vec!["method".to_string(), "t".to_string()];
        header.extend((0..n).map(|b| format!("p_{b}")));
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![self.method.as_str().to_string(), self.times[k].to_string()];
            row.extend(self.populations[k].iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `φ₀ = U⁻¹(t₀)·ψ₀`, normalized.
pub fn eigenbasis_coefficients(frame: &SpectralFrame, psi0: &ComplexVector) -> Result<ComplexVector> {
    if psi0.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: psi0.dim(),
        });
    }
    frame.inverse_frames[0]
        .mul_vec(psi0)
        .normalized()
        .ok_or_else(|| Error::Argument("initial state is zero".into()))
}

/// `U⁻¹(t)·δH(t)·U(t)` with the unscaled drive.
pub fn delta_h_tilde(frame: &SpectralFrame, pert: &PerturbationSpec, t: f64) -> Result<ComplexMatrix> {
    let Some(k) = frame.index_of(t) else {
        return arg(format!("t = {t} is not on the frame grid"));
    };
    Ok(dh_tilde_at(frame, pert, k))
}

fn dh_tilde_at(frame: &SpectralFrame, pert: &PerturbationSpec, k: usize) -> ComplexMatrix {
    &(&frame.inverse_frames[k] * &pert.sample(frame.times[k])) * &frame.frames[k]
}

fn check_phi0(frame: &SpectralFrame, phi0: &ComplexVector) -> Result<Vec<C64>> {
    if phi0.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: phi0.dim(),
        });
    }
    match phi0.normalized() {
        Some(v) => Ok(v.into()),
        None => arg("initial coefficients are zero"),
    }
}

/// `E(t)·v` with `E = diag(exp(−iΛₙ(t)))`, component-wise.
fn evolve_diag(phases: &[C64], v: &[ScaledComplex]) -> Vec<ScaledComplex> {
    phases
        .iter()
        .zip(v)
        .map(|(l, z)| ScaledComplex::exp_of(-I * l) * *z)
        .collect()
}

fn mat_scaled(m: &ComplexMatrix, v: &[ScaledComplex]) -> Vec<ScaledComplex> {
    (0..v.len())
        .map(|i| sum((0..v.len()).map(|j| v[j].scale(m[(i, j)]))))
        .collect()
}

/// Term 1 at grid index `k`:
/// `E(t)·φ₀ + W⁽¹⁾(t)·E(t)·φ₀ − E(t)·W⁽¹⁾(0)·φ₀`.
fn term1(frame: &SpectralFrame, phases: &[C64], phi0: &[C64], w0phi: &[C64], k: usize) -> Vec<ScaledComplex> {
    let v1: Vec<ScaledComplex> = phi0
        .iter()
        .zip(w0phi)
        .map(|(p, w)| ScaledComplex::new(p - w))
        .collect();
    let base = evolve_diag(phases, &v1);
    let e_phi: Vec<ScaledComplex> = evolve_diag(phases, &phi0.iter().map(|&z| ScaledComplex::new(z)).collect::<Vec<_>>());
    let corr = mat_scaled(&frame.w1[k], &e_phi);
    base.into_iter().zip(corr).map(|(a, b)| a + b).collect()
}

fn finish(method: Method, times: Vec<f64>, rows: Vec<(Vec<ScaledComplex>, [f64; 5])>) -> PredictionSeries {
    let mut coeffs = Vec::with_capacity(rows.len());
    let mut populations = Vec::with_capacity(rows.len());
    let mut term_log_norms = Vec::with_capacity(rows.len());
    for (v, terms) in rows {
        let (cf, pops) = normalized_coefficients(&to_unit(&v));
        coeffs.push(cf);
        populations.push(pops);
        term_log_norms.push(terms);
    }
    PredictionSeries {
        method,
        times,
        coeffs,
        populations,
        term_log_norms,
    }
}

pub fn naive_series(frame: &SpectralFrame, phi0: &ComplexVector) -> Result<PredictionSeries> {
    naive_series_with(frame, phi0, &PredictOptions::default())
}

pub fn naive_series_with(
    frame: &SpectralFrame,
    phi0: &ComplexVector,
    opts: &PredictOptions,
) -> Result<PredictionSeries> {
    let phi0 = check_phi0(frame, phi0)?;
    let phases = frame.phase_integrals(opts.include_lambda1);
    let w0phi: Vec<C64> = frame.w1[0].mul_vec(&ComplexVector::from_raw(phi0.clone())).into();
    let rows = (0..frame.len())
        .into_par_iter()
        .map(|k| {
            let t1 = term1(frame, &phases[k], &phi0, &w0phi, k);
            let mut norms = [f64::NEG_INFINITY; 5];
            norms[0] = log_norm(&t1);
            (t1, norms)
        })
        .collect();
    Ok(finish(Method::Naive, frame.times.clone(), rows))
}

pub fn advanced_series(
    frame: &SpectralFrame,
    phi0: &ComplexVector,
    pert: &PerturbationSpec,
) -> Result<PredictionSeries> {
    advanced_series_with(frame, phi0, pert, &PredictOptions::default())
}

/// Cumulative `Σₙ ∫ exp(i(Λₘ − Λₙ)(t₁))·Kₘₙ(t₁)·vₙ dt₁` per component `m`,
/// by the trapezoid rule on the frame grid.
fn cumulative_integral(
    frame: &SpectralFrame,
    phases: &[Vec<C64>],
    kernel: &[ComplexMatrix],
    v: &[C64],
    window: Option<(f64, f64)>,
) -> Vec<Vec<ScaledComplex>> {
    let n = frame.dim();
    let m = frame.len();
    let integrand: Vec<Vec<ScaledComplex>> = (0..m)
        .into_par_iter()
        .map(|k| {
            (0..n)
                .map(|i| {
                    sum((0..n).map(|j| {
                        let w = kernel[k][(i, j)] * v[j];
                        if w == c(0.0, 0.0) {
                            ScaledComplex::ZERO
                        } else {
                            ScaledComplex::exp_of(I * (phases[k][i] - phases[k][j])).scale(w)
                        }
                    }))
                })
                .collect()
        })
        .collect();
    let slack = 1e-9 * frame.duration();
    let inside = |t: f64| window.is_none_or(|(lo, hi)| t >= lo - slack && t <= hi + slack);
    let mut out = Vec::with_capacity(m);
    let mut acc = vec![ScaledComplex::ZERO; n];
    out.push(acc.clone());
    for k in 1..m {
        if inside(frame.times[k - 1]) && inside(frame.times[k]) {
            let half = 0.5 * (frame.times[k] - frame.times[k - 1]);
            for i in 0..n {
                acc[i] = acc[i] + (integrand[k - 1][i] + integrand[k][i]).scale(c(half, 0.0));
            }
        }
        out.push(acc.clone());
    }
    out
}

/// Five-term first-order prediction. Terms 2–5 are
/// `J(δH̃, φ₀)`, `W⁽¹⁾(t)·J(δH̃, φ₀)`, `J(δH̃, −W⁽¹⁾(0)φ₀)` and
/// `J(−[W⁽¹⁾, δH̃], φ₀)` where
/// `J(K, v)ₘ = −iε·exp(−iΛₘ(t))·Σₙ ∫₀ᵗ exp(i(Λₘ − Λₙ)(t₁))·Kₘₙ(t₁)·vₙ dt₁`.
pub fn advanced_series_with(
    frame: &SpectralFrame,
    phi0: &ComplexVector,
    pert: &PerturbationSpec,
    opts: &PredictOptions,
) -> Result<PredictionSeries> {
    pert.validate()?;
    if pert.coupling.dim() != frame.dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.dim(),
            found: pert.coupling.dim(),
        });
    }
    let phi0 = check_phi0(frame, phi0)?;
    let n = frame.dim();
    let phases = frame.phase_integrals(opts.include_lambda1);
    let w0phi: Vec<C64> = frame.w1[0].mul_vec(&ComplexVector::from_raw(phi0.clone())).into();
    let minus_w0phi: Vec<C64> = w0phi.iter().map(|z| -z).collect();

    let dht: Vec<ComplexMatrix> = (0..frame.len())
        .into_par_iter()
        .map(|k| dh_tilde_at(frame, pert, k))
        .collect();
    let neg_comm: Vec<ComplexMatrix> = dht
        .par_iter()
        .zip(&frame.w1)
        .map(|(d, w)| -&w.commutator(d))
        .collect();

    let s2 = cumulative_integral(frame, &phases, &dht, &phi0, opts.t1_window);
    let s4 = cumulative_integral(frame, &phases, &dht, &minus_w0phi, opts.t1_window);
    let s5 = cumulative_integral(frame, &phases, &neg_comm, &phi0, opts.t1_window);
    let prefactor = -I * pert.epsilon;

    let rows = (0..frame.len())
        .into_par_iter()
        .map(|k| {
            let j = |s: &[ScaledComplex]| -> Vec<ScaledComplex> {
                if pert.epsilon == 0.0 {
                    return vec![ScaledComplex::ZERO; n];
                }
                evolve_diag(&phases[k], s)
                    .into_iter()
                    .map(|z| z.scale(prefactor))
                    .collect()
            };
            let t1 = term1(frame, &phases[k], &phi0, &w0phi, k);
            let t2 = j(&s2[k]);
            let t3 = mat_scaled(&frame.w1[k], &t2);
            let t4 = j(&s4[k]);
            let t5 = j(&s5[k]);
            let norms = [
                log_norm(&t1),
                log_norm(&t2),
                log_norm(&t3),
                log_norm(&t4),
                log_norm(&t5),
            ];
            let total = (0..n)
                .map(|i| t1[i] + t2[i] + t3[i] + t4[i] + t5[i])
                .collect();
            (total, norms)
        })
        .collect();
    Ok(finish(Method::Advanced, frame.times.clone(), rows))
}
