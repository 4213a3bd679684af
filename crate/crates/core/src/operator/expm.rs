//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13), choosing the degree from the one-norm.

use num_complex::Complex64 as C64;

use super::matrix::OperatorMatrix;
use super::solve::Lu;
use crate::error::{HermitizeError, Result};

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

// Largest one-norms for which each degree reaches unit roundoff.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

pub fn matrix_exponential(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    if !a.is_finite() {
        return Err(HermitizeError::NonFinite("matrix exponential of non-finite input".into()));
    }
    let n = a.dim();
    let norm = a.one_norm();
    if norm == 0.0 {
        return Ok(OperatorMatrix::identity(n));
    }

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return finish(pade_low(a, coeffs), 0);
        }
    }

    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a.scale_real(0.5f64.powi(s));
    finish(pade13(&scaled), s as u32)
}

fn pade_low(a: &OperatorMatrix, b: &[f64]) -> (OperatorMatrix, OperatorMatrix) {
    let n = a.dim();
    let a2 = a.matmul(a);
    let mut powers = vec![OperatorMatrix::identity(n), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u = OperatorMatrix::zeros(n);
    let mut v = OperatorMatrix::zeros(n);
    for (k, p) in powers.iter().enumerate() {
        v = v.add_scaled(b[2 * k], p);
        if 2 * k + 1 < b.len() {
            u = u.add_scaled(b[2 * k + 1], p);
        }
    }
    (a.matmul(&u), v)
}

fn pade13(a: &OperatorMatrix) -> (OperatorMatrix, OperatorMatrix) {
    let b = &PADE13;
    let n = a.dim();
    let id = OperatorMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let w1 = a6.scale_real(b[13]).add_scaled(b[11], &a4).add_scaled(b[9], &a2);
    let w2 = a6.scale_real(b[7]).add_scaled(b[5], &a4).add_scaled(b[3], &a2).add_scaled(b[1], &id);
    let u = a.matmul(&(&a6.matmul(&w1) + &w2));
    let z1 = a6.scale_real(b[12]).add_scaled(b[10], &a4).add_scaled(b[8], &a2);
    let z2 = a6.scale_real(b[6]).add_scaled(b[4], &a4).add_scaled(b[2], &a2).add_scaled(b[0], &id);
    let v = &a6.matmul(&z1) + &z2;
    (u, v)
}

fn finish((u, v): (OperatorMatrix, OperatorMatrix), squarings: u32) -> Result<OperatorMatrix> {
    let p = &v + &u;
    let q = &v - &u;
    let lu = Lu::factor(&q).map_err(|_| HermitizeError::Overflow("Padé denominator is singular".into()))?;
    let mut r = lu.solve_matrix(&p);
    for _ in 0..squarings {
        r = r.matmul(&r);
        if !r.is_finite() {
            return Err(HermitizeError::Overflow("result exceeds double-precision range".into()));
        }
    }
    if !r.is_finite() {
        return Err(HermitizeError::Overflow("result exceeds double-precision range".into()));
    }
    Ok(r)
}

/// `exp(s · A)` for a complex scalar `s`.
pub fn exp_scaled(a: &OperatorMatrix, s: C64) -> Result<OperatorMatrix> {
    matrix_exponential(&a.scale(s))
}
