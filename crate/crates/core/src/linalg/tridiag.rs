//! Tridiagonal kernels: structure detection, shifted complex solves with
//! partial pivoting, and Sturm-sequence eigenvalue counting.

use nalgebra::{DMatrix, DVector};

use super::C64;
use crate::error::{Error, Result};

/// Structural tridiagonality (entries beyond the first off-diagonals are
/// exactly zero).
pub fn is_tridiagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if m.ncols() != n {
        return false;
    }
    for j in 0..n {
        for i in 0..n {
            if i.abs_diff(j) > 1 && m[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Bands of a tridiagonal matrix: `(sub, diag, sup)` with
/// `sub[i] = m[i+1, i]` and `sup[i] = m[i, i+1]`.
pub fn extract_bands(m: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let sub = (0..n - 1).map(|i| m[(i + 1, i)]).collect();
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    let sup = (0..n - 1).map(|i| m[(i, i + 1)]).collect();
    (sub, diag, sup)
}

/// Solves `(T - shift I) x = rhs` for tridiagonal `T` given by its bands,
/// using Gaussian elimination with partial pivoting (one fill-in band).
pub fn solve_shifted_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    shift: C64,
    rhs: &DVector<C64>,
) -> Result<DVector<C64>> {
    let n = diag.len();
    if sub.len() != n - 1 || sup.len() != n - 1 || rhs.len() != n {
        return Err(Error::DimensionMismatch("tridiagonal bands and rhs disagree".into()));
    }

    let dl: Vec<C64> = sub.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut d: Vec<C64> = diag.iter().map(|&v| C64::new(v, 0.0) - shift).collect();
    let mut du: Vec<C64> = sup.iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut du2: Vec<C64> = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut b: Vec<C64> = rhs.iter().copied().collect();

    let scale = d
        .iter()
        .map(|v| v.norm())
        .chain(dl.iter().map(|v| v.norm()))
        .chain(du.iter().map(|v| v.norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    // Hard-singularity guard only; near-singular shifts are left to the
    // caller's residual check so that legitimately small spectral gaps are
    // not rejected here.
    let tiny = scale * f64::EPSILON * 16.0;

    let singular = |pivot: C64| pivot.norm() <= tiny;

    for i in 0..n - 1 {
        if d[i].norm() >= dl[i].norm() {
            if singular(d[i]) {
                return Err(Error::IllConditionedShift { re: shift.re, im: shift.im });
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            let bi = b[i];
            b[i + 1] -= fact * bi;
            if i + 2 < n {
                du2[i] = C64::new(0.0, 0.0);
            }
        } else {
            // swap rows i and i+1
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du[i + 1];
            }
            b.swap(i, i + 1);
            let bi = b[i];
            b[i + 1] -= fact * bi;
        }
    }
    if singular(d[n - 1]) {
        return Err(Error::IllConditionedShift { re: shift.re, im: shift.im });
    }

    let mut x = vec![C64::new(0.0, 0.0); n];
    x[n - 1] = b[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Ok(DVector::from_vec(x))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix (diag,
/// offdiag) strictly below `x`, by Sturm sequence.
pub fn sturm_count_below(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let n = diag.len();
    debug_assert_eq!(offdiag.len(), n.saturating_sub(1));
    let mut count = 0usize;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q == 0.0 { f64::EPSILON * (diag[i].abs() + 1.0) } else { q };
        q = (diag[i] - x) - offdiag[i - 1] * offdiag[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}
