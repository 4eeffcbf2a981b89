//! Dense matrix exponential by scaling-and-squaring with a Padé(13,13)
//! approximant (Higham 2005). Order 13 is used unconditionally: the matrices
//! here are small enough that the extra multiplies are irrelevant next to
//! the accuracy headroom.

use nalgebra::DMatrix;

/// Padé(13,13) numerator coefficients (denominator uses alternating signs).
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which Padé(13) alone is accurate to double
/// precision.
const THETA_13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes `exp(a)` for a square real matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix exponential requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].exp());
    }

    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s as i32);

    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9])
        + &a6 * B[7]
        + &a4 * B[5]
        + &a2 * B[3]
        + &eye * B[1];
    let u = &scaled * u_inner;
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8])
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &eye * B[0];

    // exp(A) ~ (V - U)^{-1} (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut result = nalgebra::linalg::LU::new(lhs)
        .solve(&rhs)
        .expect("Pade denominator is singular; the scaling step should prevent this");

    for _ in 0..s {
        result = &result * &result;
    }
    result
}
