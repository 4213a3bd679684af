//! Dense complex linear algebra: the operator type, structural predicates,
//! canonical factorizations, the matrix exponential and checked linear solves.

mod compensated;
mod eigen;
mod expm;
mod factor;
mod matrix;
mod solve;
mod tolerance;

pub use compensated::{compensated_dot, compensated_sandwich};
pub use eigen::{eigenvalues, eigh, sort_spectrum, spectrum_distance, HermitianEigen};
pub use expm::{exp_scaled, matrix_exponential};
pub use factor::{
    cholesky_upper, cholesky_upper_with, hermitian_sqrt, hermitian_sqrt_with, inverse_hermitian_sqrt, is_hermitian,
    min_eigenvalue_hermitian, require_hermitian, unitarity_residual,
};
pub use matrix::{pauli, OperatorMatrix, StateVector, I};
pub use solve::{checked_lu, condition_number, right_divide, solve_linear, solve_vector, Lu, SINGULARITY_THRESHOLD};
pub use tolerance::StructuralTolerance;
