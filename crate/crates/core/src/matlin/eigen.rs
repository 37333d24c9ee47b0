use super::lu::{mat_inv_with, Lu};
use super::{c, ComplexMatrix, ComplexVector, C64, MAX_DIM};
use crate::error::{arg, Error, Result};

/// Tolerances for [`eig_general_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigConfig {
    /// Residual bound relative to `‖A‖_F`.
    pub residual_tol: f64,
    /// Largest eigenvector-matrix condition number accepted before the input
    /// is treated as sitting on an exceptional point.
    pub max_condition: f64,
    /// QR sweep budget per unit of dimension.
    pub sweeps_per_dim: usize,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            max_condition: 1e8,
            sweeps_per_dim: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors, each with its largest
    /// component real and positive.
    pub right_vectors: ComplexMatrix,
    /// `‖A·V − V·diag(values)‖_F`
    pub residual: f64,
    /// `‖V‖₁·‖V⁻¹‖₁`
    pub condition: f64,
}

pub fn eig_general(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    eig_general_with(a, &EigConfig::default())
}

/// Eigendecomposition of a diagonalizable matrix.
///
/// `N = 2` uses the quadratic formula with the principal square root, so the
/// first eigenvalue is `tr/2 + √((a−d)²/4 + bc)`. Larger matrices go through
/// Hessenberg reduction, Wilkinson-shifted QR and inverse iteration.
pub fn eig_general_with(a: &ComplexMatrix, cfg: &EigConfig) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n > MAX_DIM {
        return arg(format!("eig_general supports N <= {MAX_DIM}, got {n}"));
    }
    let (values, mut vectors) = match n {
        1 => (vec![a[(0, 0)]], ComplexMatrix::identity(1)),
        2 => closed_form_2x2(a),
        _ => {
            let values = qr_eigenvalues(a, cfg.sweeps_per_dim * n)?;
            let vectors = inverse_iteration(a, &values);
            (values, vectors)
        }
    };
    for j in 0..n {
        let v = fix_local_gauge(&vectors.column(j));
        vectors.set_column(j, &v);
    }

    let condition = match mat_inv_with(&vectors, f64::INFINITY) {
        Ok(inv) => vectors.norm_one() * inv.norm_one(),
        Err(_) => f64::INFINITY,
    };
    if !(condition <= cfg.max_condition) {
        return Err(Error::NearExceptionalPoint {
            condition,
            context: "eigenvector matrix is (nearly) singular".into(),
        });
    }

    let residual = (&(a * &vectors) - &(&vectors * &ComplexMatrix::diag(&values)))
        .frobenius_norm();
    let tolerance = cfg.residual_tol * a.frobenius_norm().max(f64::MIN_POSITIVE);
    if residual > tolerance {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    Ok(EigenDecomposition {
        values,
        right_vectors: vectors,
        residual,
        condition,
    })
}

/// Unit norm with the largest-magnitude component made real-positive.
pub(crate) fn fix_local_gauge(v: &ComplexVector) -> ComplexVector {
    let Some(v) = v.normalized() else {
        return v.clone();
    };
    let pivot = v
        .iter()
        .copied()
        .fold(C64::new(0.0, 0.0), |best, z| if z.norm() > best.norm() { z } else { best });
    v.scale(pivot.conj() / pivot.norm())
}

fn closed_form_2x2(m: &ComplexMatrix) -> (Vec<C64>, ComplexMatrix) {
    let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * cc).sqrt();
    let values = vec![half_tr + disc, half_tr - disc];

    let scale = m.frobenius_norm().max(1.0);
    let mut vectors = ComplexMatrix::zeros(2);
    for (k, &lam) in values.iter().enumerate() {
        // Each row of (A − λI)x = 0 gives a candidate null vector; take the
        // better conditioned one.
        let from_row0 = ComplexVector::from_raw(vec![b, lam - a]);
        let from_row1 = ComplexVector::from_raw(vec![lam - d, cc]);
        let v = if from_row0.norm() >= from_row1.norm() {
            from_row0
        } else {
            from_row1
        };
        let v = if v.norm() <= 1e-14 * scale {
            // A is a multiple of the identity.
            ComplexVector::basis(2, k)
        } else {
            v
        };
        vectors.set_column(k, &v);
    }
    (values, vectors)
}

fn hessenberg(a: &ComplexMatrix) -> Vec<Vec<C64>> {
    let n = a.dim();
    let mut h: Vec<Vec<C64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).collect())
        .collect();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[i][k]).collect();
        let alpha_norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            c(1.0, 0.0)
        };
        let mut v = x.clone();
        v[0] += phase * alpha_norm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H ← (I − 2vv†) H (I − 2vv†) on the trailing block.
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|i| v[i].conj() * h[k + 1 + i][j]).sum();
            for i in 0..v.len() {
                h[k + 1 + i][j] -= v[i] * s * 2.0;
            }
        }
        for row in h.iter_mut() {
            let s: C64 = (0..v.len()).map(|j| row[k + 1 + j] * v[j]).sum();
            for j in 0..v.len() {
                row[k + 1 + j] -= s * v[j].conj() * 2.0;
            }
        }
        for row in h.iter_mut().skip(k + 2) {
            row[k] = c(0.0, 0.0);
        }
    }
    h
}

fn wilkinson_shift(a: C64, b: C64, cc: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * cc).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_eigenvalues(a: &ComplexMatrix, max_sweeps: usize) -> Result<Vec<C64>> {
    let n = a.dim();
    let mut h = hessenberg(a);
    let mut values = vec![c(0.0, 0.0); n];
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let eps = f64::EPSILON;

    loop {
        if hi == 0 {
            values[0] = h[0][0];
            break;
        }
        for k in (1..=hi).rev() {
            let scale = h[k][k].norm() + h[k - 1][k - 1].norm();
            if h[k][k - 1].norm() <= eps * scale.max(f64::MIN_POSITIVE) {
                h[k][k - 1] = c(0.0, 0.0);
            }
        }
        if h[hi][hi - 1] == c(0.0, 0.0) {
            values[hi] = h[hi][hi];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 && h[lo][lo - 1] != c(0.0, 0.0) {
            lo -= 1;
        }

        sweeps += 1;
        since_deflation += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence { sweeps: max_sweeps });
        }
        let mut mu = wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
        if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            mu += c(h[hi][hi - 1].norm() * 0.75, 0.0);
        }

        for k in lo..=hi {
            h[k][k] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[k][k];
            let y = h[k + 1][k];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == 0.0 {
                (c(1.0, 0.0), c(0.0, 0.0))
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let top = h[k][j];
                let bot = h[k + 1][j];
                h[k][j] = cs.conj() * top + sn.conj() * bot;
                h[k + 1][j] = -sn * top + cs * bot;
            }
            rotations.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rotations.iter().enumerate() {
            let k = lo + idx;
            for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(lo) {
                let left = row[k];
                let right = row[k + 1];
                row[k] = left * cs + right * sn;
                row[k + 1] = -left * sn.conj() + right * cs.conj();
            }
        }
        for k in lo..=hi {
            h[k][k] += mu;
        }
    }
    Ok(values)
}

fn inverse_iteration(a: &ComplexMatrix, values: &[C64]) -> ComplexMatrix {
    let n = a.dim();
    let scale = a.frobenius_norm().max(1.0);
    let mut vectors = ComplexMatrix::zeros(n);
    for (k, &lam) in values.iter().enumerate() {
        let shift = lam + c(1e-13 * scale, 1e-13 * scale);
        let shifted = &ComplexMatrix::identity(n).scale(-shift) + a;
        let lu = Lu::factor_regularized(&shifted, 1e-300);
        let mut v = ComplexVector::from_raw(
            (0..n)
                .map(|i| c(1.0 + 0.37 * i as f64, 0.11 * (i + k) as f64))
                .collect(),
        );
        for _ in 0..3 {
            let w = lu.solve(&v);
            v = match w.normalized() {
                Some(w) => w,
                None => break,
            };
        }
        vectors.set_column(k, &v);
    }
    vectors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{mat_inv, I};

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_input() {
        let a = ComplexMatrix::diag(&[c(1.0, 2.0), c(3.0, 0.0)]);
        let e = eig_general(&a).unwrap();
        for (j, &lam) in e.values.iter().enumerate() {
            let v = e.right_vectors.column(j);
            let k = if lam == c(3.0, 0.0) { 1 } else { 0 };
            assert!((v[k] - c(1.0, 0.0)).norm() < 1e-15);
            assert!(v[1 - k].norm() < 1e-15);
        }
        let vals = sorted(e.values);
        assert_eq!(vals, vec![c(1.0, 2.0), c(3.0, 0.0)]);
    }

    #[test]
    fn example_hamiltonian_at_origin() {
        let h = ComplexMatrix::from_real_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        let e = eig_general(&h).unwrap();
        assert!((e.values[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e.values[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn planted_spectrum_5x5() {
        let planted = vec![
            c(-2.0, 0.5),
            c(-0.7, -1.0),
            c(0.3, 0.2),
            c(1.1, -0.4),
            c(2.5, 1.5),
        ];
        let mut s = 99u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut v = ComplexMatrix::identity(5);
        for i in 0..5 {
            for j in 0..5 {
                v[(i, j)] += c(next(), next()) * 0.8;
            }
        }
        let a = &(&v * &ComplexMatrix::diag(&planted)) * &mat_inv(&v).unwrap();
        let e = eig_general(&a).unwrap();
        let got = sorted(e.values.clone());
        for (g, w) in got.iter().zip(sorted(planted)) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
        assert!(e.residual < 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn hermitian_input_gives_real_values_and_unitary_vectors() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.5, 0.5), c(0.0, -0.3), c(0.1, 0.0)],
            vec![c(0.5, -0.5), c(-1.0, 0.0), c(0.2, 0.0), c(0.0, 0.4)],
            vec![c(0.0, 0.3), c(0.2, 0.0), c(0.5, 0.0), c(0.6, -0.1)],
            vec![c(0.1, 0.0), c(0.0, -0.4), c(0.6, 0.1), c(1.5, 0.0)],
        ])
        .unwrap();
        let e = eig_general(&a).unwrap();
        assert!(e.values.iter().all(|z| z.im.abs() < 1e-10));
        let v = &e.right_vectors;
        let gram = &(&v.adjoint() * v) - &ComplexMatrix::identity(4);
        assert!(gram.frobenius_norm() < 1e-9, "{}", gram.frobenius_norm());
    }

    #[test]
    fn exact_exceptional_point_is_rejected() {
        // δ = 0, g = 1: both eigenvalues and eigenvectors coalesce.
        let h = ComplexMatrix::from_rows(&[vec![I, c(-1.0, 0.0)], vec![c(-1.0, 0.0), -I]])
            .unwrap();
        assert!(matches!(
            eig_general(&h),
            Err(Error::NearExceptionalPoint { .. })
        ));
    }

    #[test]
    fn jordan_block_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        assert!(eig_general(&a).is_err());
    }

    #[test]
    fn gauge_makes_largest_component_real_positive() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.3, 0.1), c(1.0, -2.0), c(0.0, 0.5)],
            vec![c(0.2, 0.0), c(-0.5, 1.0), c(1.0, 0.0)],
            vec![c(0.0, 1.0), c(0.4, 0.0), c(1.2, -0.3)],
        ])
        .unwrap();
        let e = eig_general(&a).unwrap();
        for j in 0..3 {
            let v = e.right_vectors.column(j);
            assert!((v.norm() - 1.0).abs() < 1e-14);
            let big = v.iter().copied().max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap()).unwrap();
            assert!(big.im.abs() < 1e-14 && big.re > 0.0);
        }
    }
}
