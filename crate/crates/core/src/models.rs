//! Hamiltonian families, trajectories and fast perturbations.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::matlin::{c, eig_general, ComplexMatrix, C64, I};

/// Circular trajectory in the `(δ, g)` plane:
/// `δ(t) = δ₀ − R·sin(ωt + φ)`, `g(t) = g₀ − R·cos(ωt + φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub delta0: f64,
    pub g0: f64,
    pub radius: f64,
    pub total_time: f64,
    pub omega: f64,
    pub phi: f64,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta0,
            self.g0,
            self.radius,
            self.total_time,
            self.omega,
            self.phi,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return arg("trajectory parameters must be finite");
        }
        if self.total_time <= 0.0 {
            return arg(format!("total_time must be > 0, got {}", self.total_time));
        }
        if self.radius < 0.0 {
            return arg(format!("radius must be >= 0, got {}", self.radius));
        }
        Ok(())
    }

    pub fn delta(&self, t: f64) -> f64 {
        self.delta0 - self.radius * (self.omega * t + self.phi).sin()
    }

    pub fn g(&self, t: f64) -> f64 {
        self.g0 - self.radius * (self.omega * t + self.phi).cos()
    }

    /// The same loop traversed in the opposite direction from the same start.
    pub fn reversed(&self) -> Self {
        Self {
            omega: -self.omega,
            ..*self
        }
    }
}

/// Fast drive `ε·cos(Ωt)·coupling`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub omega: f64,
    pub coupling: ComplexMatrix,
}

impl PerturbationSpec {
    /// Off-diagonal ones coupling, the two-level drive used throughout the examples.
    pub fn off_diagonal(epsilon: f64, omega: f64) -> Self {
        Self {
            epsilon,
            omega,
            coupling: ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
                .expect("constant 2x2 matrix"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return arg(format!("epsilon must be finite and >= 0, got {}", self.epsilon));
        }
        if !self.omega.is_finite() {
            return arg("perturbation frequency must be finite");
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    /// `cos(Ωt)·coupling`, without the `ε` prefactor.
    pub fn sample(&self, t: f64) -> ComplexMatrix {
        self.coupling.scale(c((self.omega * t).cos(), 0.0))
    }

    /// `ε·cos(Ωt)·coupling`.
    pub fn sample_scaled(&self, t: f64) -> ComplexMatrix {
        self.coupling
            .scale(c(self.epsilon * (self.omega * t).cos(), 0.0))
    }
}

pub fn sample_perturbation(spec: &PerturbationSpec, t: f64) -> ComplexMatrix {
    spec.sample(t)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathKind {
    Circle2x2(TrajectorySpec),
    /// `[[λt/2, η], [η, −λt/2]]` on `t ∈ [−t₀/2, t₀/2]`.
    LandauZener { slope: f64, coupling: f64, window: f64 },
    /// Entrywise linear interpolation between samples.
    SampledTable {
        times: Vec<f64>,
        matrices: Vec<ComplexMatrix>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPath {
    kind: PathKind,
    perturbation: Option<PerturbationSpec>,
}

impl HamiltonianPath {
    pub fn new(kind: PathKind) -> Result<Self> {
        match &kind {
            PathKind::Circle2x2(spec) => spec.validate()?,
            PathKind::LandauZener {
                slope,
                coupling,
                window,
            } => {
                if !(*slope > 0.0 && *coupling > 0.0 && *window > 0.0)
                    || ![slope, coupling, window].iter().all(|x| x.is_finite())
                {
                    return arg("landau_zener slope, coupling and window must be finite and > 0");
                }
            }
            PathKind::SampledTable { times, matrices } => {
                if times.len() < 2 || times.len() != matrices.len() {
                    return arg("sampled table needs at least two (time, matrix) pairs");
                }
                if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
                    return arg("sampled table times must be finite and strictly increasing");
                }
                let n = matrices[0].dim();
                if let Some(m) = matrices.iter().find(|m| m.dim() != n) {
                    return Err(crate::Error::DimensionMismatch {
                        expected: n,
                        found: m.dim(),
                    });
                }
            }
        }
        Ok(Self {
            kind,
            perturbation: None,
        })
    }

    pub fn circle(spec: TrajectorySpec) -> Result<Self> {
        Self::new(PathKind::Circle2x2(spec))
    }

    pub fn landau_zener(slope: f64, coupling: f64, window: f64) -> Result<Self> {
        Self::new(PathKind::LandauZener {
            slope,
            coupling,
            window,
        })
    }

    pub fn sampled(times: Vec<f64>, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(PathKind::SampledTable { times, matrices })
    }

    pub fn with_perturbation(mut self, pert: PerturbationSpec) -> Result<Self> {
        pert.validate()?;
        if pert.coupling.dim() != self.dim() {
            return Err(crate::Error::DimensionMismatch {
                expected: self.dim(),
                found: pert.coupling.dim(),
            });
        }
        self.perturbation = Some(pert);
        Ok(self)
    }

    pub fn without_perturbation(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            perturbation: None,
        }
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn perturbation(&self) -> Option<&PerturbationSpec> {
        self.perturbation.as_ref()
    }

    pub fn trajectory(&self) -> Option<&TrajectorySpec> {
        match &self.kind {
            PathKind::Circle2x2(spec) => Some(spec),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            PathKind::Circle2x2(_) | PathKind::LandauZener { .. } => 2,
            PathKind::SampledTable { matrices, .. } => matrices[0].dim(),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            PathKind::Circle2x2(spec) => (0.0, spec.total_time),
            PathKind::LandauZener { window, .. } => (-window / 2.0, window / 2.0),
            PathKind::SampledTable { times, .. } => (times[0], times[times.len() - 1]),
        }
    }

    pub fn duration(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Clamps `t` into the domain, allowing for round-off at the ends.
    fn check_time(&self, t: f64) -> Result<f64> {
        let (a, b) = self.domain();
        let slack = 1e-9 * (b - a);
        if !t.is_finite() || t < a - slack || t > b + slack {
            return arg(format!("t = {t} outside path domain [{a}, {b}]"));
        }
        Ok(t.clamp(a, b))
    }

    pub fn sample_h(&self, t: f64) -> Result<ComplexMatrix> {
        let t = self.check_time(t)?;
        Ok(self.eval(t))
    }

    /// `H(t) + ε·δH(t)`.
    pub fn sample_total(&self, t: f64) -> Result<ComplexMatrix> {
        let t = self.check_time(t)?;
        Ok(self.eval_total(t))
    }

    pub(crate) fn eval_total(&self, t: f64) -> ComplexMatrix {
        let h = self.eval(t);
        match &self.perturbation {
            Some(p) if p.epsilon != 0.0 => &h + &p.sample_scaled(t),
            _ => h,
        }
    }

    fn eval(&self, t: f64) -> ComplexMatrix {
        match &self.kind {
            PathKind::Circle2x2(spec) => {
                let z = c(spec.delta(t), spec.g(t));
                two_level(z, c(-1.0, 0.0))
            }
            PathKind::LandauZener {
                slope, coupling, ..
            } => two_level(c(slope * t / 2.0, 0.0), c(*coupling, 0.0)),
            PathKind::SampledTable { times, matrices } => {
                let j = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[j - 1], times[j]);
                let w = (t - t0) / (t1 - t0);
                &matrices[j - 1].scale(c(1.0 - w, 0.0)) + &matrices[j].scale(c(w, 0.0))
            }
        }
    }

    /// Largest adiabaticity ratio along `samples` evenly spaced times.
    ///
    /// For the circle this is `|ω| / |λ₊ − λ₋|`; for other paths it is
    /// `‖∂ₜH‖_F / gap²`. Points where the decomposition fails count as
    /// infinitely fast.
    pub fn slowness_diagnostic(&self, samples: usize) -> f64 {
        let samples = samples.max(2);
        let (a, b) = self.domain();
        let dt = (b - a) / (samples - 1) as f64;
        let mut worst = 0.0f64;
        for k in 0..samples {
            let t = a + k as f64 * dt;
            let ratio = match &self.kind {
                PathKind::Circle2x2(spec) => {
                    let (lp, lm) = closed_form_eigvals(spec.delta(t), spec.g(t));
                    spec.omega.abs() / (lp - lm).norm()
                }
                _ => {
                    let h = (dt * 1e-3).max(1e-9);
                    let lo = self.eval((t - h).max(a));
                    let hi = self.eval((t + h).min(b));
                    let rate = (&hi - &lo).frobenius_norm() / ((t + h).min(b) - (t - h).max(a));
                    match eig_general(&self.eval(t)) {
                        Ok(e) => {
                            let mut gap = f64::INFINITY;
                            for i in 0..e.values.len() {
                                for j in i + 1..e.values.len() {
                                    gap = gap.min((e.values[i] - e.values[j]).norm());
                                }
                            }
                            if gap.is_finite() {
                                rate / (gap * gap)
                            } else {
                                0.0
                            }
                        }
                        Err(_) => f64::INFINITY,
                    }
                }
            };
            worst = worst.max(if ratio.is_nan() { f64::INFINITY } else { ratio });
        }
        if worst > 0.1 {
            log::warn!("slowness diagnostic {worst:.3} exceeds 0.1; adiabatic predictions may be unreliable");
        }
        worst
    }
}

fn two_level(diag: C64, off: C64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(2);
    h[(0, 0)] = diag;
    h[(1, 1)] = -diag;
    h[(0, 1)] = off;
    h[(1, 0)] = off;
    h
}

/// `(λ₊, λ₋) = (+√(1 + (δ + ig)²), −λ₊)` with the principal square root.
pub fn closed_form_eigvals(delta: f64, g: f64) -> (C64, C64) {
    let z = c(delta, 0.0) + I * g;
    let lp = (c(1.0, 0.0) + z * z).sqrt();
    (lp, -lp)
}
