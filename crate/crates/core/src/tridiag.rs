//! Thomas algorithm for symmetric tridiagonal systems.

/// Solves `A x = rhs` in place, where `A` has main diagonal `diag` and
/// sub/super diagonal `off` (`off[i]` couples unknowns `i` and `i + 1`).
///
/// No pivoting: the caller guarantees `A` is diagonally dominant, which is
/// the case for the coercive operators assembled in this crate.
pub fn solve_symmetric(diag: &[f64], off: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    assert!(n >= 2 && off.len() == n - 1 && rhs.len() == n);
    let mut c = vec![0.0; n - 1];
    let mut denom = diag[0];
    c[0] = off[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}
