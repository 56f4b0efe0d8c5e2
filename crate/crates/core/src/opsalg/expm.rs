//! Matrix exponential by scaling and squaring with diagonal Padé approximants.

use nalgebra::LU;

use super::{CMatrix, OperatorMatrix, C64};
use crate::error::Result;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
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

// Largest 1-norms for which each approximant meets double-precision backward error.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Solves `(V − U) X = (V + U)`.
fn pade_quotient(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = v - u;
    LU::new(q).solve(&p).expect("Padé denominator is nonsingular for scaled input")
}

fn pade_low(a: &CMatrix, b: &[f64]) -> CMatrix {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    // Powers A^0, A^2, A^4, ...
    let mut even = vec![id];
    while even.len() * 2 < b.len() {
        let next = even.last().unwrap() * &a2;
        even.push(next);
    }
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, p) in even.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u += p * re(b[2 * k + 1]);
        }
        v += p * re(b[2 * k]);
    }
    pade_quotient(a * u, v)
}

fn pade13(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let b = &PADE13;
    let id = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
        + &a6 * re(b[7])
        + &a4 * re(b[5])
        + &a2 * re(b[3])
        + &id * re(b[1]);
    let u = a * u_inner;
    let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
        + &a6 * re(b[6])
        + &a4 * re(b[4])
        + &a2 * re(b[2])
        + &id * re(b[0]);
    pade_quotient(u, v)
}

/// `exp(A)` for a raw square matrix.
pub fn mat_exp_matrix(a: &CMatrix) -> CMatrix {
    let norm = one_norm(a);
    if norm <= THETA3 {
        return pade_low(a, &PADE3);
    }
    if norm <= THETA5 {
        return pade_low(a, &PADE5);
    }
    if norm <= THETA7 {
        return pade_low(a, &PADE7);
    }
    if norm <= THETA9 {
        return pade_low(a, &PADE9);
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a * re(0.5f64.powi(s));
    let mut x = pade13(&scaled);
    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// Matrix exponential of a square operator.
pub fn mat_exp(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    OperatorMatrix::new(mat_exp_matrix(a.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        for d in 1..6 {
            let e = mat_exp(&OperatorMatrix::zeros(d)).unwrap();
            assert_eq!(e, OperatorMatrix::identity(d));
        }
    }

    #[test]
    fn exp_of_diagonal() {
        // Exercises every approximant branch including scaling.
        for &x in &[1e-3, 0.2, 0.9, 2.0, 5.0, 40.0, -30.0] {
            let a = OperatorMatrix::from_real_diagonal(&[x, -x / 2.0]);
            let e = mat_exp(&a).unwrap();
            assert!((e.matrix()[(0, 0)].re / x.exp() - 1.0).abs() < 1e-13, "x={x}");
            assert!((e.matrix()[(1, 1)].re / (-x / 2.0).exp() - 1.0).abs() < 1e-13);
        }
    }
}
