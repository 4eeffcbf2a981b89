//! Complex upper-triangular Schur form of small real matrices.
//!
//! nalgebra produces the real (quasi-triangular) Schur form; the 2x2 blocks
//! holding complex-conjugate pairs are diagonalized with a block-diagonal
//! complex similarity. The result is a genuinely triangular `T` with the
//! eigenvalues on its diagonal, which is what the column-by-column Sylvester
//! recursion needs.

use nalgebra::{DMatrix, Schur};

use super::C64;
use crate::error::{Error, Result};

/// `a = q t qinv` with `t` upper triangular complex and `q` invertible.
pub struct ComplexSchur {
    pub q: DMatrix<C64>,
    pub qinv: DMatrix<C64>,
    pub t: DMatrix<C64>,
}

/// Computes the complexified Schur form.
///
/// `swap_conjugates` flips the processing order of each conjugate pair,
/// which permutes the triangular form; the Sylvester solution must be
/// invariant under this reordering, so it doubles as a consistency probe.
pub fn complex_schur(a: &DMatrix<f64>, swap_conjugates: bool) -> Result<ComplexSchur> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("Schur factorization needs a square matrix".into()));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("real Schur iteration failed to converge".into()))?;
    let (q_real, t_real) = schur.unpack();

    // Block-diagonal complex similarity W: identity on 1x1 blocks, the
    // eigenvector matrix of each 2x2 block elsewhere.
    let mut w = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut winv = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut i = 0usize;
    while i < n {
        let is_block = i + 1 < n && {
            let sub = t_real[(i + 1, i)].abs();
            sub > 10.0 * f64::EPSILON * (t_real[(i, i)].abs() + t_real[(i + 1, i + 1)].abs())
        };
        if !is_block {
            w[(i, i)] = C64::new(1.0, 0.0);
            winv[(i, i)] = C64::new(1.0, 0.0);
            i += 1;
            continue;
        }

        let (a11, a12) = (t_real[(i, i)], t_real[(i, i + 1)]);
        let (a21, a22) = (t_real[(i + 1, i)], t_real[(i + 1, i + 1)]);
        let mean = 0.5 * (a11 + a22);
        let disc = 0.25 * (a11 - a22) * (a11 - a22) + a12 * a21;

        let (v0, v1) = if disc < 0.0 {
            let lam = C64::new(mean, (-disc).sqrt());
            // eigenvector of [[a11,a12],[a21,a22]] for lam
            if a12.abs() >= a21.abs() {
                (C64::new(a12, 0.0), lam - C64::new(a11, 0.0))
            } else {
                (lam - C64::new(a22, 0.0), C64::new(a21, 0.0))
            }
        } else {
            // distinct real eigenvalues in an unsplit block
            let root = disc.sqrt();
            if root == 0.0 {
                return Err(Error::Numeric("defective 2x2 Schur block".into()));
            }
            let lam = C64::new(mean + root, 0.0);
            if a12.abs() >= a21.abs() {
                (C64::new(a12, 0.0), lam - C64::new(a11, 0.0))
            } else {
                (lam - C64::new(a22, 0.0), C64::new(a21, 0.0))
            }
        };

        // second column: the conjugate eigenvector (or the second real one)
        let (u0, u1) = if disc < 0.0 {
            (v0.conj(), v1.conj())
        } else {
            let root = disc.sqrt();
            let lam2 = C64::new(mean - root, 0.0);
            if a12.abs() >= a21.abs() {
                (C64::new(a12, 0.0), lam2 - C64::new(a11, 0.0))
            } else {
                (lam2 - C64::new(a22, 0.0), C64::new(a21, 0.0))
            }
        };

        let (c0, c1) = if swap_conjugates { ((u0, u1), (v0, v1)) } else { ((v0, v1), (u0, u1)) };
        let det = c0.0 * c1.1 - c1.0 * c0.1;
        if det.norm() <= 1e-30 {
            return Err(Error::Numeric("degenerate eigenvector basis in 2x2 Schur block".into()));
        }
        w[(i, i)] = c0.0;
        w[(i + 1, i)] = c0.1;
        w[(i, i + 1)] = c1.0;
        w[(i + 1, i + 1)] = c1.1;
        winv[(i, i)] = c1.1 / det;
        winv[(i, i + 1)] = -c1.0 / det;
        winv[(i + 1, i)] = -c0.1 / det;
        winv[(i + 1, i + 1)] = c0.0 / det;
        i += 2;
    }

    let tc = t_real.map(|v| C64::new(v, 0.0));
    let qc = q_real.map(|v| C64::new(v, 0.0));
    let mut t = &winv * tc * &w;
    // scrub roundoff below the diagonal so back-substitution sees a clean
    // triangle
    for j in 0..n {
        for i2 in j + 1..n {
            t[(i2, j)] = C64::new(0.0, 0.0);
        }
    }
    let q = &qc * &w;
    let qinv = &winv * qc.transpose();
    Ok(ComplexSchur { q, qinv, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reconstruct(cs: &ComplexSchur) -> DMatrix<C64> {
        &cs.q * &cs.t * &cs.qinv
    }

    #[test]
    fn rotation_matrix_triangularizes() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let cs = complex_schur(&s, false).unwrap();
        // diagonal carries +-i
        let d0 = cs.t[(0, 0)];
        let d1 = cs.t[(1, 1)];
        assert_relative_eq!(d0.im.abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(d1.im.abs(), 1.0, epsilon = 1e-12);
        assert!(d0.re.abs() < 1e-12 && d1.re.abs() < 1e-12);
        assert!((d0 + d1).norm() < 1e-12);
        let rec = reconstruct(&cs);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[(i, j)] - C64::new(s[(i, j)], 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn conjugate_swap_flips_diagonal_order() {
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let plain = complex_schur(&s, false).unwrap();
        let swapped = complex_schur(&s, true).unwrap();
        assert!((plain.t[(0, 0)] - swapped.t[(1, 1)]).norm() < 1e-12);
        let rec = reconstruct(&swapped);
        assert!((rec[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mixed_real_and_complex_spectrum() {
        // eigenvalues: -2, 1 +- 2i
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[-2.0, 3.0, 1.0, 0.0, 1.0, 2.0, 0.0, -2.0, 1.0],
        );
        let cs = complex_schur(&a, false).unwrap();
        let mut eigs: Vec<C64> = (0..3).map(|i| cs.t[(i, i)]).collect();
        eigs.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert_relative_eq!(eigs[0].re, -2.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[1].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[2].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(eigs[1].im.abs(), 2.0, epsilon = 1e-10);
        let rec = reconstruct(&cs);
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec[(i, j)] - C64::new(a[(i, j)], 0.0)).norm() < 1e-9);
            }
        }
        // strictly triangular below the diagonal
        for j in 0..3 {
            for i in j + 1..3 {
                assert_eq!(cs.t[(i, j)].norm(), 0.0);
            }
        }
    }
}
