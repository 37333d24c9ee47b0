use super::lu::Lu;
use super::{c, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Inputs with a larger 1-norm would overflow `f64`; callers must pre-scale.
pub const MAX_EXP_NORM: f64 = 600.0;

const PADE_DEGREE: usize = 8;

/// Matrix exponential: closed form for `N ≤ 2`, scaling and squaring with a
/// diagonal Padé approximant otherwise.
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let norm = a.norm_one();
    if !(norm <= MAX_EXP_NORM) {
        return Err(Error::Magnitude { norm });
    }
    Ok(match a.dim() {
        1 => ComplexMatrix::diag(&[a[(0, 0)].exp()]),
        2 => exp_2x2(a),
        _ => exp_pade(a),
    })
}

/// `sinh(μ)/μ`, analytic through `μ = 0`.
fn sinhc(mu: C64) -> C64 {
    if mu.norm() < 1e-4 {
        let m2 = mu * mu;
        c(1.0, 0.0) + m2 / 6.0 + m2 * m2 / 120.0
    } else {
        mu.sinh() / mu
    }
}

fn exp_2x2(a: &ComplexMatrix) -> ComplexMatrix {
    // A = (tr/2)·I + B with B traceless, B² = μ²·I.
    let half_tr = a.trace() * 0.5;
    let b00 = a[(0, 0)] - half_tr;
    let mu = (b00 * b00 + a[(0, 1)] * a[(1, 0)]).sqrt();
    let pre = half_tr.exp();
    let ch = mu.cosh();
    let sc = sinhc(mu);
    let mut out = ComplexMatrix::zeros(2);
    out[(0, 0)] = pre * (ch + sc * b00);
    out[(1, 1)] = pre * (ch - sc * b00);
    out[(0, 1)] = pre * sc * a[(0, 1)];
    out[(1, 0)] = pre * sc * a[(1, 0)];
    out
}

fn exp_pade(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let norm = a.norm_one();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let x = a.scale(c(1.0 / 2f64.powi(squarings as i32), 0.0));

    // c_k = (2q−k)! q! / ((2q)! k! (q−k)!)
    let q = PADE_DEGREE;
    let mut coeffs = vec![1.0f64; q + 1];
    for k in 1..=q {
        coeffs[k] = coeffs[k - 1] * (q + 1 - k) as f64 / (k as f64 * (2 * q + 1 - k) as f64);
    }

    let id = ComplexMatrix::identity(n);
    let mut numer = id.clone();
    let mut denom = id.clone();
    let mut power = id;
    for (k, &ck) in coeffs.iter().enumerate().skip(1) {
        power = &power * &x;
        let term = power.scale(c(ck, 0.0));
        numer = &numer + &term;
        denom = if k % 2 == 0 {
            &denom + &term
        } else {
            &denom - &term
        };
    }
    let lu = Lu::factor(&denom).expect("Padé denominator is well conditioned for ‖X‖ ≤ 1/2");
    let mut result = ComplexMatrix::zeros(n);
    for j in 0..n {
        result.set_column(j, &lu.solve(&numer.column(j)));
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
