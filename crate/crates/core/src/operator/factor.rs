//! Structural predicates and the two canonical metric factorizations.

use num_complex::Complex64 as C64;

use super::eigen::eigh;
use super::matrix::OperatorMatrix;
use super::tolerance::StructuralTolerance;
use crate::error::{HermitizeError, Result};

/// True iff the max-norm of `A − A†` is at most `tol`.
pub fn is_hermitian(a: &OperatorMatrix, tol: f64) -> bool {
    a.hermiticity_residual() <= tol
}

/// Errors unless `a` is Hermitian to `tol` relative to `max(1, ‖a‖∞)`.
pub fn require_hermitian(a: &OperatorMatrix, tol: f64) -> Result<()> {
    let residual = a.hermiticity_residual();
    let scaled = tol * a.max_norm().max(1.0);
    if residual > scaled {
        return Err(HermitizeError::NotHermitian { residual, tol: scaled });
    }
    Ok(())
}

/// Max-norm of `U†U − I`.
pub fn unitarity_residual(u: &OperatorMatrix) -> f64 {
    u.adjoint().matmul(u).distance(&OperatorMatrix::identity(u.dim()))
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue_hermitian(a: &OperatorMatrix) -> Result<f64> {
    require_hermitian(a, StructuralTolerance::for_dim(a.dim()).hermiticity_tol)?;
    Ok(eigh(a).values[0])
}

/// Upper-triangular `E` with positive real diagonal and `E†E = G`.
pub fn cholesky_upper(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    cholesky_upper_with(g, &StructuralTolerance::for_dim(g.dim()))
}

pub fn cholesky_upper_with(g: &OperatorMatrix, tol: &StructuralTolerance) -> Result<OperatorMatrix> {
    require_hermitian(g, tol.hermiticity_tol)?;
    let n = g.dim();
    let mut r = OperatorMatrix::zeros(n);
    for j in 0..n {
        let d = g[(j, j)].re - (0..j).map(|k| r[(k, j)].norm_sqr()).sum::<f64>();
        if !(d > tol.positivity_tol) {
            return Err(HermitizeError::MetricDegeneracy { pivot: j, value: d });
        }
        let rjj = d.sqrt();
        r[(j, j)] = C64::new(rjj, 0.0);
        for l in j + 1..n {
            let s: C64 = (0..j).map(|k| r[(k, j)].conj() * r[(k, l)]).sum();
            r[(j, l)] = (g[(j, l)] - s) / rjj;
        }
    }
    Ok(r)
}

/// The unique Hermitian positive-definite square root of `G`.
pub fn hermitian_sqrt(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    hermitian_sqrt_with(g, &StructuralTolerance::for_dim(g.dim()))
}

pub fn hermitian_sqrt_with(g: &OperatorMatrix, tol: &StructuralTolerance) -> Result<OperatorMatrix> {
    require_hermitian(g, tol.hermiticity_tol)?;
    let eig = eigh(g);
    if let Some((k, &v)) = eig.values.iter().enumerate().find(|(_, &v)| !(v > tol.positivity_tol)) {
        return Err(HermitizeError::MetricDegeneracy { pivot: k, value: v });
    }
    Ok(eig.map_spectrum(f64::sqrt).hermitian_part())
}

/// Inverse Hermitian square root `G^{-1/2}`.
pub fn inverse_hermitian_sqrt(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    let tol = StructuralTolerance::for_dim(g.dim());
    require_hermitian(g, tol.hermiticity_tol)?;
    let eig = eigh(g);
    if let Some((k, &v)) = eig.values.iter().enumerate().find(|(_, &v)| !(v > tol.positivity_tol)) {
        return Err(HermitizeError::MetricDegeneracy { pivot: k, value: v });
    }
    Ok(eig.map_spectrum(|x| 1.0 / x.sqrt()).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::matrix::{pauli, I};

    #[test]
    fn hermiticity_predicate() {
        assert!(is_hermitian(&pauli::sigma_x(), 0.0));
        assert!(!is_hermitian(&pauli::sigma_x().scale(I), 1e-12));
        let a = OperatorMatrix::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(1.0, 1e-10)],
            vec![C64::new(1.0, -1e-10), C64::new(2.0, 0.0)],
        ])
        .unwrap();
        // Exactly Hermitian: conj(1 + 1e-10 i) = 1 − 1e-10 i.
        assert!(is_hermitian(&a, 1e-9));
        assert_eq!(a.hermiticity_residual(), 0.0);
    }

    #[test]
    fn min_eigenvalues() {
        assert_eq!(min_eigenvalue_hermitian(&OperatorMatrix::real_diagonal(&[2.0, 1.0])).unwrap(), 1.0);
        assert_eq!(min_eigenvalue_hermitian(&OperatorMatrix::real_diagonal(&[1.0, -1.0])).unwrap(), -1.0);
        let a = OperatorMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!((min_eigenvalue_hermitian(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            min_eigenvalue_hermitian(&pauli::sigma_y().scale(I)),
            Err(HermitizeError::NotHermitian { .. })
        ));
    }

    #[test]
    fn cholesky_examples() {
        assert_eq!(cholesky_upper(&OperatorMatrix::identity(3)).unwrap(), OperatorMatrix::identity(3));
        let g = OperatorMatrix::from_real_rows(&[&[4.0, 2.0], &[2.0, 2.0]]).unwrap();
        let e = cholesky_upper(&g).unwrap();
        assert!(e.distance(&OperatorMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 1.0]]).unwrap()) < 1e-15);
        assert!(e.adjoint().matmul(&e).distance(&g) < 1e-15);
        match cholesky_upper(&OperatorMatrix::real_diagonal(&[1.0, -1.0])) {
            Err(HermitizeError::MetricDegeneracy { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_examples() {
        let s = hermitian_sqrt(&OperatorMatrix::real_diagonal(&[4.0, 1.0])).unwrap();
        assert!(s.distance(&OperatorMatrix::real_diagonal(&[2.0, 1.0])) < 1e-15);
        assert!(hermitian_sqrt(&OperatorMatrix::identity(2)).unwrap().distance(&OperatorMatrix::identity(2)) < 1e-15);

        // Eigen-route oracle for [[2,1],[1,2]]: eigenpairs 3 ↦ (1,1)/√2, 1 ↦ (1,−1)/√2,
        // so √G = ((√3 + 1)/2) I + ((√3 − 1)/2) σx.
        let g = OperatorMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = hermitian_sqrt(&g).unwrap();
        let r3 = 3f64.sqrt();
        let expected =
            OperatorMatrix::from_real_rows(&[&[(r3 + 1.0) / 2.0, (r3 - 1.0) / 2.0], &[(r3 - 1.0) / 2.0, (r3 + 1.0) / 2.0]])
                .unwrap();
        assert!(s.distance(&expected) < 1e-14);
        assert!(s.matmul(&s).distance(&g) <= 1e-12);
        assert!(hermitian_sqrt(&OperatorMatrix::real_diagonal(&[1.0, -1.0])).is_err());
    }
}
