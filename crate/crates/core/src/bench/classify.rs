use crate::error::{arg, Error, Result};
use crate::spectral::SpectralFrame;

/// Two `Im` values closer than this are treated as equal.
pub const TIE_TOL: f64 = 1e-9;
pub const DEFAULT_WINDOW: f64 = 0.1;
pub const WINDOW_FLOOR: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MostGrowing {
    Branch(usize),
    /// The leading branches agree within [`TIE_TOL`].
    Tie,
}

/// Strict argmax of `values`, or `None` if the top two are within `tol`.
fn strict_argmax(values: impl Iterator<Item = f64>, tol: f64) -> Option<usize> {
    let mut best = None::<(usize, f64)>;
    let mut second = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v <= b => second = second.max(v),
            Some((_, b)) => {
                second = b;
                best = Some((i, v));
            }
            None => best = Some((i, v)),
        }
    }
    let (i, b) = best?;
    (b - second > tol).then_some(i)
}

/// `argmaxₙ Im Λₙ(T)`.
pub fn classify_most_growing(frame: &SpectralFrame) -> MostGrowing {
    let last = &frame.lambda_integrals[frame.len() - 1];
    match strict_argmax(last.iter().map(|z| z.im), TIE_TOL) {
        Some(b) => MostGrowing::Branch(b),
        None => MostGrowing::Tie,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointVerdict {
    pub branch: usize,
    /// Window fraction actually used.
    pub y: f64,
}

/// Branch with the largest window-averaged `Im λₙ` over `[T(1−y), T]`.
///
/// The window is halved (down to [`WINDOW_FLOOR`]) until the pointwise
/// leader is the same at every grid point in it; points where the leaders
/// are tied carry no information and are skipped.
pub fn classify_endpoint_fastest(frame: &SpectralFrame, y: f64) -> Result<EndpointVerdict> {
    classify_endpoint_fastest_with(frame, y, WINDOW_FLOOR)
}

pub fn classify_endpoint_fastest_with(
    frame: &SpectralFrame,
    y: f64,
    floor: f64,
) -> Result<EndpointVerdict> {
    if !(y > 0.0 && y <= 1.0) {
        return arg(format!("window fraction must lie in (0, 1], got {y}"));
    }
    if !(floor > 0.0) {
        return arg(format!("window floor must be > 0, got {floor}"));
    }
    let t_end = frame.times[frame.len() - 1];
    let dur = frame.duration();
    let mut y = y;
    loop {
        let start = t_end - y * dur;
        let ks: Vec<usize> = (0..frame.len())
            .filter(|&k| frame.times[k] >= start - 1e-12 * dur)
            .collect();
        let leaders: Vec<usize> = ks
            .iter()
            .filter_map(|&k| strict_argmax(frame.lambdas[k].iter().map(|z| z.im), TIE_TOL))
            .collect();
        let constant = !leaders.is_empty() && leaders.iter().all(|&b| b == leaders[0]);
        if constant {
            let n = frame.dim();
            let mut avg = vec![0.0; n];
            for &k in &ks {
                for (b, z) in frame.lambdas[k].iter().enumerate() {
                    avg[b] += z.im / ks.len() as f64;
                }
            }
            let branch = avg
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(b, _)| b)
                .unwrap_or(0);
            return Ok(EndpointVerdict { branch, y });
        }
        if y / 2.0 < floor {
            return Err(Error::IndeterminateEndpoint { y });
        }
        y /= 2.0;
    }
}

/// Upward crossings of `threshold`, linearly interpolated.
pub fn detect_switch_times(times: &[f64], population: &[f64], threshold: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..times.len().min(population.len()) {
        let (p0, p1) = (population[k - 1], population[k]);
        if p0 < threshold && p1 >= threshold {
            let w = (threshold - p0) / (p1 - p0);
            out.push(times[k - 1] + w * (times[k] - times[k - 1]));
        }
    }
    out
}

/// The last upward crossing, the usual meaning of "the switch time".
pub fn last_switch(times: &[f64], population: &[f64], threshold: f64) -> Option<f64> {
    detect_switch_times(times, population, threshold).last().copied()
}

/// Times at which the leader of `Im Λₙ(t)` changes, i.e. where the naive
/// theory's preferred state flips. Tied points (such as `t = 0`) are skipped.
pub fn naive_crossing_times(frame: &SpectralFrame) -> Vec<f64> {
    let im = |k: usize, b: usize| frame.lambda_integrals[k][b].im;
    let mut out = Vec::new();
    let mut prev: Option<(usize, usize)> = None;
    for k in 0..frame.len() {
        let Some(lead) = strict_argmax(frame.lambda_integrals[k].iter().map(|z| z.im), TIE_TOL)
        else {
            continue;
        };
        if let Some((kp, old)) = prev {
            if old != lead {
                let d0 = im(kp, old) - im(kp, lead);
                let d1 = im(k, old) - im(k, lead);
                let w = if d0 != d1 { d0 / (d0 - d1) } else { 0.5 };
                out.push(frame.times[kp] + w * (frame.times[k] - frame.times[kp]));
            }
        }
        prev = Some((k, lead));
    }
    out
}

/// Index of the largest final population.
pub fn winner(final_populations: &[f64]) -> usize {
    final_populations
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
