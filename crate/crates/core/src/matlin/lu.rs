use super::{c, ComplexMatrix, ComplexVector, C64};
use crate::error::{Error, Result};

/// Default cap on the 1-norm condition estimate accepted by [`mat_inv`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Clone, Debug)]
pub struct Lu {
    dim: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Fails with [`Error::Singular`] when a pivot is exactly zero.
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Err(Error::Singular {
                    estimate: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Self { dim: n, lu, perm })
    }

    /// Like [`Lu::factor`] but replaces exactly-zero pivots with `tiny`; used
    /// by inverse iteration where the shifted matrix is singular by design.
    pub(crate) fn factor_regularized(a: &ComplexMatrix, tiny: f64) -> Self {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, _) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            if lu[k * n + k].norm() < tiny {
                lu[k * n + k] = c(tiny, 0.0);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Self { dim: n, lu, perm }
    }

    pub fn solve(&self, b: &ComplexVector) -> ComplexVector {
        let n = self.dim;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                x[i] = x[i] - u * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        ComplexVector::from_raw(x)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut inv = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&ComplexVector::basis(n, j));
            inv.set_column(j, &col);
        }
        inv
    }
}

/// Inverse with the default condition cap.
pub fn mat_inv(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    mat_inv_with(a, DEFAULT_CONDITION_CAP)
}

/// Inverse via partial-pivoting LU. The condition estimate is
/// `‖A‖₁·‖A⁻¹‖₁`; anything above `cap` is reported as singular.
pub fn mat_inv_with(a: &ComplexMatrix, cap: f64) -> Result<ComplexMatrix> {
    let inv = Lu::factor(a)?.inverse();
    let estimate = a.norm_one() * inv.norm_one();
    if !estimate.is_finite() || estimate > cap || !inv.is_finite() {
        return Err(Error::Singular { estimate });
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::I;

    #[test]
    fn identity_inverse() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(mat_inv(&id).unwrap(), id);
    }

    #[test]
    fn diagonal_inverse() {
        let a = ComplexMatrix::diag(&[c(2.0, 0.0), I]);
        let inv = mat_inv(&a).unwrap();
        let want = ComplexMatrix::diag(&[c(0.5, 0.0), -I]);
        assert!((&inv - &want).max_abs() < 1e-15);
    }

    #[test]
    fn well_conditioned_residual() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(4.0, 1.0), c(0.5, 0.0), c(0.1, -0.2), c(0.0, 0.3)],
            vec![c(0.2, 0.0), c(3.0, -1.0), c(0.3, 0.1), c(-0.4, 0.0)],
            vec![c(-0.1, 0.5), c(0.0, 0.2), c(5.0, 0.0), c(0.7, 0.7)],
            vec![c(0.3, 0.0), c(-0.6, 0.1), c(0.2, 0.0), c(2.5, 2.0)],
        ])
        .unwrap();
        let inv = mat_inv(&a).unwrap();
        let r = &(&a * &inv) - &ComplexMatrix::identity(4);
        assert!(r.frobenius_norm() < 1e-10, "{}", r.frobenius_norm());
    }

    #[test]
    fn singular_matrix_reports_estimate() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(mat_inv(&a), Err(Error::Singular { .. })));
        let nearly = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]])
            .unwrap();
        match mat_inv(&nearly) {
            Err(Error::Singular { estimate }) => assert!(estimate > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
