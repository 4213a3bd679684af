//! LU factorization with partial pivoting and a one-norm condition estimator.

use num_complex::Complex64 as C64;

use super::matrix::{OperatorMatrix, StateVector};
use crate::error::{HermitizeError, Result};

/// Condition estimates above this are reported as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    a_one_norm: f64,
}

impl Lu {
    pub fn factor(a: &OperatorMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("non-empty pivot column");
            if pmax == 0.0 {
                return Err(HermitizeError::Singular { condition: f64::INFINITY });
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, a_one_norm: a.one_norm() })
    }

    /// Solves `A x = b` in place.
    fn solve_in_place(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[i * n + k] * x[k];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A† x = b`.
    fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        // A = Pᵀ L U  ⇒  A† = U† L† P.
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.lu[k * n + i].conj() * w[k];
            }
            w[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i].conj() * w[k];
            }
            w[i] = s;
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    /// Higham's block-free variant of Hager's estimator for `‖A⁻¹‖₁`.
    pub fn inverse_one_norm_estimate(&self) -> f64 {
        let n = self.n;
        let one_norm = |v: &[C64]| v.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_in_place(&x);
            est = one_norm(&y);
            let xi: Vec<C64> =
                y.iter().map(|z| if z.norm() == 0.0 { C64::new(1.0, 0.0) } else { z / z.norm() }).collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, w)| (j, w.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        // Alternating test vector guards against the estimator's blind spots.
        let alt: Vec<C64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let mag = if n > 1 { 1.0 + i as f64 / (n - 1) as f64 } else { 1.0 };
                C64::new(sign * mag, 0.0)
            })
            .collect();
        let alt_est = 2.0 * one_norm(&self.solve_in_place(&alt)) / (3.0 * n as f64);
        est.max(alt_est)
    }

    /// One-norm condition number estimate of the factored matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.a_one_norm * self.inverse_one_norm_estimate()
    }

    pub fn solve_matrix(&self, b: &OperatorMatrix) -> OperatorMatrix {
        let n = self.n;
        assert_eq!(n, b.dim(), "dimension mismatch in solve");
        let mut out = OperatorMatrix::zeros(n);
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_in_place(&col);
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn solve_vector(&self, b: &StateVector) -> StateVector {
        StateVector::from_vec_unchecked(self.solve_in_place(b.as_slice()))
    }
}

/// Factors `a` and rejects it when the condition estimate exceeds `1e12`.
pub fn checked_lu(a: &OperatorMatrix) -> Result<Lu> {
    let lu = Lu::factor(a)?;
    let cond = lu.condition_estimate();
    if !(cond <= SINGULARITY_THRESHOLD) {
        return Err(HermitizeError::Singular { condition: cond });
    }
    Ok(lu)
}

/// Solves `A X = B`.
pub fn solve_linear(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    Ok(checked_lu(a)?.solve_matrix(b))
}

/// Solves `A x = b` for a vector right-hand side.
pub fn solve_vector(a: &OperatorMatrix, b: &StateVector) -> Result<StateVector> {
    if a.dim() != b.len() {
        return Err(HermitizeError::Shape("right-hand side does not conform".into()));
    }
    Ok(checked_lu(a)?.solve_vector(b))
}

/// Computes `B A⁻¹` as `(A†⁻¹ B†)†`.
pub fn right_divide(b: &OperatorMatrix, a: &OperatorMatrix) -> Result<OperatorMatrix> {
    Ok(solve_linear(&a.adjoint(), &b.adjoint())?.adjoint())
}

/// Estimated one-norm condition number; infinite for exactly singular input.
pub fn condition_number(a: &OperatorMatrix) -> f64 {
    Lu::factor(a).map(|lu| lu.condition_estimate()).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = OperatorMatrix::from_fn(3, |i, j| C64::new(i as f64, j as f64 * 2.0 - 1.0));
        assert_eq!(solve_linear(&OperatorMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_solve() {
        let a = OperatorMatrix::real_diagonal(&[2.0, 4.0]);
        let x = solve_linear(&a, &OperatorMatrix::identity(2)).unwrap();
        assert_eq!(x, OperatorMatrix::real_diagonal(&[0.5, 0.25]));
    }

    #[test]
    fn back_substitution_vector() {
        let a = OperatorMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let b = StateVector::new(vec![c(1.0), c(1.0)]).unwrap();
        let x = solve_vector(&a, &b).unwrap();
        assert_eq!(x.as_slice(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let a = OperatorMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve_linear(&a, &OperatorMatrix::identity(2)), Err(HermitizeError::Singular { .. })));
        let nearly = OperatorMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0 + 1e-14]]).unwrap();
        assert!(matches!(solve_linear(&nearly, &OperatorMatrix::identity(2)), Err(HermitizeError::Singular { .. })));
    }

    #[test]
    fn condition_estimate_matches_exact_value_on_small_cases() {
        // cond₁(diag(1, 1e-6)) = 1e6 exactly.
        let a = OperatorMatrix::real_diagonal(&[1.0, 1e-6]);
        let k = condition_number(&a);
        assert!((k - 1e6).abs() / 1e6 < 1e-12, "{k}");
        // [[1, 1],[0, 1]]: ‖A‖₁ = 2, ‖A⁻¹‖₁ = 2, so κ₁ = 4. The estimator is a
        // lower bound and stays within a small factor of the truth.
        let b = OperatorMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let k = condition_number(&b);
        assert!(k <= 4.0 + 1e-12 && k >= 4.0 / 3.0, "{k}");
    }

    #[test]
    fn right_division_inverts_from_the_right() {
        let a = OperatorMatrix::from_rows(&[vec![C64::new(1.0, 1.0), c(2.0)], vec![c(0.5), C64::new(0.0, -3.0)]])
            .unwrap();
        let b = OperatorMatrix::from_rows(&[vec![c(1.0), C64::new(0.0, 1.0)], vec![c(-2.0), c(0.25)]]).unwrap();
        let x = right_divide(&b, &a).unwrap();
        assert!(x.matmul(&a).distance(&b) < 1e-14);
    }
}
