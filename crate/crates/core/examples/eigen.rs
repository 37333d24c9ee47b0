//! Eigendecomposition of the two-level Hamiltonian near its exceptional
//! points, a planted 4x4 spectrum, and the matrix exponential.

use nhslow::matlin::{eig_general, mat_exp, ComplexMatrix, C64};
use nhslow::models::closed_form_eigvals;

fn hamiltonian(delta: f64, g: f64) -> ComplexMatrix {
    let z = C64::new(delta, g);
    let m = C64::new(-1.0, 0.0);
    ComplexMatrix::from_rows(&[vec![z, m], vec![m, -z]]).unwrap()
}

fn main() -> nhslow::Result<()> {
    let (lp, lm) = closed_form_eigvals(0.0, 1.0);
    println!("at the EP (0, 1): lambda = {lp}, {lm}");

    // The gap closes like a square root as g -> 1.
    for d in [1e-2, 1e-4, 1e-6] {
        let (a, b) = closed_form_eigvals(0.0, 1.0 - d);
        let e = eig_general(&hamiltonian(0.0, 1.0 - d))?;
        let gap = (e.values[0] - e.values[1]).norm();
        println!(
            "g = 1 - {d:e}: gap {gap:.3e} (closed form {:.3e})  gap/sqrt(d) = {:.4}  cond(V) = {:.1}",
            (a - b).norm(),
            gap / d.sqrt(),
            e.condition
        );
    }

    let h = hamiltonian(0.1, 0.4);
    let e = eig_general(&h)?;
    println!("eigenvalues {:?}  residual {:.1e}  cond(V) {:.2}", e.values, e.residual, e.condition);

    // Upper-triangular input: the spectrum is the diagonal.
    let planted = [C64::new(2.0, 0.5), C64::new(-1.0, 0.0), C64::new(0.5, -0.25), C64::new(0.0, 1.0)];
    let mut a = ComplexMatrix::diag(&planted);
    for i in 0..4 {
        for j in i + 1..4 {
            a[(i, j)] = C64::new(0.3 * (i + j) as f64, 0.1);
        }
    }
    let e = eig_general(&a)?;
    println!("planted 4x4 recovered: {:?}", e.values);

    let u = mat_exp(&h.scale(C64::new(0.0, -1.0)))?;
    println!("exp(-iH) = {u:?}");
    Ok(())
}
