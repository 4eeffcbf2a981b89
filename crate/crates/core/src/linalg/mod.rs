//! Shared dense linear-algebra kernels.
//!
//! Everything here is plain (unweighted) matrix arithmetic; the weighted
//! function-space conventions live in [`crate::operator`].

pub mod expm;
pub mod schur;
pub mod tridiag;

pub use expm::expm;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Complex scalar used throughout the spectral kernels.
pub type C64 = Complex<f64>;

/// Eigenvalues of a (numerically) symmetric matrix. The input is
/// symmetrized first so that roundoff asymmetry cannot leak into the
/// eigensolver.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues
}

pub fn lambda_max_symmetric(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).max()
}

pub fn lambda_min_symmetric(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).min()
}

/// True when `m` is symmetric up to `tol` relative to its largest entry.
pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.amax().max(1e-300);
    (m - m.transpose()).amax() <= tol * scale
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<C64> {
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Singular values of a real matrix, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Singular values of the complex matrix `re + i im`, descending.
///
/// Computed through the real embedding `[[re, -im], [im, re]]`, whose
/// singular values are those of the complex matrix, each doubled; adjacent
/// pairs are collapsed.
pub fn complex_singular_values(re: &DMatrix<f64>, im: &DMatrix<f64>) -> Result<Vec<f64>> {
    if re.shape() != im.shape() {
        return Err(Error::DimensionMismatch(
            "real and imaginary parts must share a shape".into(),
        ));
    }
    let (r, c) = re.shape();
    let mut big = DMatrix::zeros(2 * r, 2 * c);
    big.view_mut((0, 0), (r, c)).copy_from(re);
    big.view_mut((0, c), (r, c)).copy_from(&(-im));
    big.view_mut((r, 0), (r, c)).copy_from(im);
    big.view_mut((r, c), (r, c)).copy_from(re);
    let sv = singular_values(&big);
    Ok(sv.iter().step_by(2).copied().collect())
}

/// Numeric rank: number of singular values above `rel_tol * sigma_max`.
pub fn rank_from_singular_values(sv: &[f64], rel_tol: f64) -> usize {
    match sv.first() {
        None => 0,
        Some(&smax) if smax == 0.0 => 0,
        Some(&smax) => sv.iter().filter(|&&s| s > rel_tol * smax).count(),
    }
}

/// Numeric rank of a real matrix.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    rank_from_singular_values(&singular_values(m), rel_tol)
}

/// Kalman-style reachability matrix `[B, AB, ..., A^{n-1}B]`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    out
}

/// Solves the small Lyapunov equation `A^T X + X A = C` by vectorizing to a
/// dense Kronecker system; intended for the ODE-sized factors only.
pub fn solve_small_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || c.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Lyapunov operands must be square and matching".into()));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let kron = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = nalgebra::linalg::LU::new(kron)
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular Lyapunov operator (eigenvalue pair sums to zero)".into()))?;
    let x = DMatrix::from_column_slice(n, n, sol.as_slice());
    // roundoff symmetrization; the exact solution is symmetric for symmetric C
    Ok((&x + x.transpose()) * 0.5)
}

/// Dense solve with an explicit singularity error.
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    nalgebra::linalg::LU::new(a.clone())
        .solve(b)
        .ok_or_else(|| Error::Numeric("singular dense system".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complex_singular_values_match_known_case() {
        // diag(1+i, 3) has singular values sqrt(2) and 3
        let re = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let im = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let sv = complex_singular_values(&re, &im).unwrap();
        assert_relative_eq!(sv[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(sv[1], 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn rank_counts_above_threshold() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert_eq!(numeric_rank(&m, 1e-10), 1);
        assert_eq!(numeric_rank(&m, 1e-16), 2);
    }

    #[test]
    fn controllability_matrix_rotation() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let g = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let k = controllability_matrix(&s, &g);
        assert_eq!(numeric_rank(&k, 1e-10), 2);
    }

    #[test]
    fn small_lyapunov_reproduces_identity_case() {
        // A = -I: A^T X + X A = -2X = C  =>  X = -C/2
        let a = DMatrix::from_diagonal_element(3, 3, -1.0);
        let c = DMatrix::from_diagonal_element(3, 3, -2.0);
        let x = solve_small_lyapunov(&a, &c).unwrap();
        assert_relative_eq!(x, DMatrix::identity(3, 3), epsilon = 1e-12);
    }

    #[test]
    fn small_lyapunov_residual_random_stable() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.3, 0.0, -2.0, 1.0, 0.1, -0.5, -3.0]);
        let c = DMatrix::from_diagonal_element(3, 3, -2.0);
        let x = solve_small_lyapunov(&a, &c).unwrap();
        let res = a.transpose() * &x + &x * &a - c;
        assert!(res.amax() < 1e-12);
    }
}
