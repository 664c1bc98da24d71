//! Gauss–Hermite rules for expectations under the standard normal.

use nalgebra::{DMatrix, SymmetricEigen};

/// `n`-point rule `(node, weight)` with `sum_i w_i f(x_i) = E[f(Y)]`,
/// `Y ~ N(0, 1)`, exact for polynomials of degree `< 2n`.
///
/// Built by Golub–Welsch from the Jacobi matrix of the probabilist's
/// Hermite recurrence.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}
