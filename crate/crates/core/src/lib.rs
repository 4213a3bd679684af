//! Hermitization of non-Hermitian Hamiltonians through time-dependent
//! vielbein frames.
//!
//! A non-Hermitian `H` preserves norms only under a dynamical metric `G(t)`
//! obeying `∂ₜG = i(GH − H†G)`. Factoring `G = E†E` gives a vielbein `E`, and
//! states mapped by `E` evolve under the induced Hamiltonian
//! `H♭ = EHE⁻¹ + i(∂ₜE)E⁻¹`, which is always Hermitian. Left-multiplying `E` by
//! a unitary flow is a gauge transformation that changes `H♭` without changing
//! any expectation value.
//!
//! Module map:
//! - [`operator`]: dense complex linear algebra substrate.
//! - [`models`]: Hamiltonian catalog (two-level loss, two-mode bosonic, custom).
//! - [`flow`]: fixed-step Runge–Kutta integration on uniform grids.
//! - [`metric`]: metric flow with Hermitian projection and positivity checks.
//! - [`vielbein`]: frames, induced Hamiltonians and gauge transformations.
//! - [`dynamics`]: states, inner products, observables, picture frames.
//! - [`oracles`]: closed-form metrics and vielbeins used as ground truth.
//! - [`acceptance`]: the end-to-end verification suite.

pub mod acceptance;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod fock;
pub mod metric;
pub mod models;
pub mod operator;
pub mod oracles;
pub mod vielbein;

pub use num_complex::Complex64 as C64;

pub use error::{HermitizeError, Result};
pub use operator::{OperatorMatrix, StateVector, StructuralTolerance};
