use crate::error::{HermitizeError, Result};

/// Thresholds for the structural predicates (Hermiticity, positivity,
/// unitarity).
///
/// Hermiticity and unitarity thresholds are applied relative to
/// `max(1, ‖A‖∞)` by the validating operations; `is_hermitian` itself
/// takes an absolute tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralTolerance {
    pub hermiticity_tol: f64,
    pub positivity_tol: f64,
    pub unitarity_tol: f64,
}

impl StructuralTolerance {
    pub const POSITIVITY_DEFAULT: f64 = 1e-12;
    pub const UNITARITY_DEFAULT: f64 = 1e-8;

    /// Defaults for a `dim`-dimensional space: `1e-10 * dim`, `1e-12`, `1e-8`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            hermiticity_tol: 1e-10 * dim as f64,
            positivity_tol: Self::POSITIVITY_DEFAULT,
            unitarity_tol: Self::UNITARITY_DEFAULT,
        }
    }

    pub fn new(hermiticity_tol: f64, positivity_tol: f64, unitarity_tol: f64) -> Result<Self> {
        for (name, v) in [
            ("hermiticity_tol", hermiticity_tol),
            ("positivity_tol", positivity_tol),
            ("unitarity_tol", unitarity_tol),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(HermitizeError::Parameter(format!("{name} must be a nonnegative finite number, got {v}")));
            }
        }
        Ok(Self { hermiticity_tol, positivity_tol, unitarity_tol })
    }
}
