//! Hamiltonian catalog: the lossy two-level system, the lossy two-mode
//! bosonic system on a number-truncated Fock space, and user-supplied models.
//!
//! Units: ħ = 1, energies and rates share one unit, time is its inverse.

use std::fmt;
use std::sync::Arc;


use crate::error::{HermitizeError, Result};
use crate::fock::FockSpace;
use crate::operator::{pauli, OperatorMatrix, I};

/// A time-dependent operator-valued function. Must be pure.
pub type TimeOperator = Arc<dyn Fn(f64) -> OperatorMatrix + Send + Sync>;

/// Wraps a closure as a [`TimeOperator`].
pub fn time_operator(f: impl Fn(f64) -> OperatorMatrix + Send + Sync + 'static) -> TimeOperator {
    Arc::new(f)
}

/// A constant operator as a [`TimeOperator`].
pub fn constant_operator(m: OperatorMatrix) -> TimeOperator {
    Arc::new(move |_| m.clone())
}

/// Default exceptional-point tolerance, relative to the EP scale.
pub const DEFAULT_EP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelLossParams {
    pub omega: f64,
    pub gamma: f64,
}

impl TwoLevelLossParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        if !omega.is_finite() || !gamma.is_finite() {
            return Err(HermitizeError::Parameter("omega and gamma must be finite".into()));
        }
        if omega == 0.0 {
            return Err(HermitizeError::Parameter("omega must be nonzero".into()));
        }
        Ok(Self { omega, gamma })
    }

    /// `1e-9 · 2|ω|`.
    pub fn default_ep_tol(&self) -> f64 {
        DEFAULT_EP_TOL * 2.0 * self.omega.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeBosonicParams {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub g: f64,
    pub n_max: usize,
}

impl TwoModeBosonicParams {
    pub fn new(gamma_a: f64, gamma_b: f64, g: f64, n_max: usize) -> Result<Self> {
        if !gamma_a.is_finite() || !gamma_b.is_finite() || !g.is_finite() {
            return Err(HermitizeError::Parameter("bosonic parameters must be finite".into()));
        }
        if n_max < 1 {
            return Err(HermitizeError::Parameter("n_max must be at least 1".into()));
        }
        Ok(Self { gamma_a, gamma_b, g, n_max })
    }

    /// `1e-9 · 4|g|`.
    pub fn default_ep_tol(&self) -> f64 {
        DEFAULT_EP_TOL * 4.0 * self.g.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Underdamped,
    Overdamped,
    ExceptionalPoint,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Underdamped => "underdamped",
            Regime::Overdamped => "overdamped",
            Regime::ExceptionalPoint => "exceptional-point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BosonicRegime {
    NonEp,
    Ep,
}

impl fmt::Display for BosonicRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BosonicRegime::NonEp => "non-ep",
            BosonicRegime::Ep => "ep",
        })
    }
}

/// Which catalog entry a model came from; used to look up closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    TwoLevelLoss(TwoLevelLossParams),
    TwoModeBosonic(TwoModeBosonicParams),
    Custom,
}

#[derive(Clone)]
pub struct HamiltonianModel {
    dim: usize,
    label: String,
    time_independent: bool,
    kind: ModelKind,
    evaluator: TimeOperator,
}

impl fmt::Debug for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianModel")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("time_independent", &self.time_independent)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl HamiltonianModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn evaluate(&self, t: f64) -> OperatorMatrix {
        (self.evaluator)(t)
    }

    /// The evaluator as a shareable time function.
    pub fn as_time_operator(&self) -> TimeOperator {
        self.evaluator.clone()
    }

    /// Marks a custom model as time-independent.
    pub fn with_time_independent(mut self, flag: bool) -> Self {
        self.time_independent = flag;
        self
    }
}

/// `H = (ω/2)σx − i(γ/2)σ⁺σ⁻` with basis order (excited, ground).
pub fn two_level_loss(params: TwoLevelLossParams) -> Result<HamiltonianModel> {
    let p = TwoLevelLossParams::new(params.omega, params.gamma)?;
    let h = &pauli::sigma_x().scale_real(p.omega / 2.0) - &pauli::excited_projector().scale(I * (p.gamma / 2.0));
    Ok(HamiltonianModel {
        dim: 2,
        label: format!("two_level_loss(omega={}, gamma={})", p.omega, p.gamma),
        time_independent: true,
        kind: ModelKind::TwoLevelLoss(p),
        evaluator: constant_operator(h),
    })
}

pub fn classify_regime(params: &TwoLevelLossParams, ep_tol: f64) -> Regime {
    let gap = params.gamma.abs() - 2.0 * params.omega.abs();
    if gap.abs() <= ep_tol {
        Regime::ExceptionalPoint
    } else if gap < 0.0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// The bosonic Hamiltonian matrix on the truncated space.
pub fn bosonic_matrix(params: &TwoModeBosonicParams) -> OperatorMatrix {
    let space = FockSpace::new(params.n_max);
    let loss = &space.number_a().scale(I * (-params.gamma_a / 2.0)) + &space.number_b().scale(I * (-params.gamma_b / 2.0));
    let hop = &space.create_a().matmul(&space.annihilate_b()) + &space.create_b().matmul(&space.annihilate_a());
    loss.add_scaled(params.g, &hop)
}

/// `H = −i(γa/2)a†a − i(γb/2)b†b + g(a†b + b†a)` on `n_a + n_b ≤ n_max`.
pub fn two_mode_bosonic(params: TwoModeBosonicParams) -> Result<HamiltonianModel> {
    let p = TwoModeBosonicParams::new(params.gamma_a, params.gamma_b, params.g, params.n_max)?;
    let h = bosonic_matrix(&p);
    Ok(HamiltonianModel {
        dim: h.dim(),
        label: format!("two_mode_bosonic(gamma_a={}, gamma_b={}, g={}, n_max={})", p.gamma_a, p.gamma_b, p.g, p.n_max),
        time_independent: true,
        kind: ModelKind::TwoModeBosonic(p),
        evaluator: constant_operator(h),
    })
}

/// EP iff `||γa − γb| − 4|g|| ≤ ep_tol`.
pub fn classify_bosonic_regime(params: &TwoModeBosonicParams, ep_tol: f64) -> BosonicRegime {
    if ((params.gamma_a - params.gamma_b).abs() - 4.0 * params.g.abs()).abs() <= ep_tol {
        BosonicRegime::Ep
    } else {
        BosonicRegime::NonEp
    }
}

const CUSTOM_SAMPLE_TIMES: [f64; 3] = [0.0, 0.37, 1.0];

/// Wraps a user evaluator, validating its output at a few sample times.
pub fn custom_model(
    dim: usize,
    evaluator: impl Fn(f64) -> OperatorMatrix + Send + Sync + 'static,
    label: impl Into<String>,
) -> Result<HamiltonianModel> {
    if dim == 0 {
        return Err(HermitizeError::Shape("model dimension must be at least 1".into()));
    }
    for t in CUSTOM_SAMPLE_TIMES {
        let m = evaluator(t);
        if m.dim() != dim {
            return Err(HermitizeError::Shape(format!(
                "evaluator returned a {0}x{0} matrix at t = {t}, expected {dim}x{dim}",
                m.dim()
            )));
        }
        if !m.is_finite() {
            return Err(HermitizeError::NonFinite(format!("evaluator output at t = {t}")));
        }
    }
    Ok(HamiltonianModel {
        dim,
        label: label.into(),
        time_independent: false,
        kind: ModelKind::Custom,
        evaluator: Arc::new(evaluator),
    })
}

/// A constant custom model.
pub fn constant_model(h: OperatorMatrix, label: impl Into<String>) -> Result<HamiltonianModel> {
    let dim = h.dim();
    Ok(custom_model(dim, move |_| h.clone(), label)?.with_time_independent(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use crate::operator::{eigenvalues, is_hermitian, spectrum_distance};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_level_examples() {
        let h = two_level_loss(TwoLevelLossParams::new(1.0, 0.0).unwrap()).unwrap().evaluate(0.3);
        assert_eq!(h, pauli::sigma_x().scale_real(0.5));
        assert!(is_hermitian(&h, 0.0));

        let h = two_level_loss(TwoLevelLossParams::new(1.0, 2.0).unwrap()).unwrap().evaluate(0.0);
        let expected = OperatorMatrix::from_rows(&[vec![c(0.0, -1.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(h, expected);

        let h = two_level_loss(TwoLevelLossParams { omega: 2.0, gamma: 1.0 }).unwrap().evaluate(5.0);
        let expected = OperatorMatrix::from_rows(&[vec![c(0.0, -0.5), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(h, expected);

        assert!(TwoLevelLossParams::new(0.0, 1.0).is_err());
        assert!(two_level_loss(TwoLevelLossParams { omega: 0.0, gamma: 1.0 }).is_err());
    }

    #[test]
    fn regimes() {
        let cls = |g: f64| classify_regime(&TwoLevelLossParams::new(1.0, g).unwrap(), 1e-9);
        assert_eq!(cls(1.0), Regime::Underdamped);
        assert_eq!(cls(4.0), Regime::Overdamped);
        assert_eq!(cls(2.0), Regime::ExceptionalPoint);
        assert_eq!(cls(-2.0), Regime::ExceptionalPoint);
        assert_eq!(cls(2.0 + 1e-6), Regime::Overdamped);
    }

    #[test]
    fn two_level_spectrum_matches_regime_formula() {
        // h± = −iγ/4 ± (ω/2)λ with λ = λ< (real) or iλ> (imaginary).
        for (omega, gamma) in [(1.0, 1.0), (1.0, 0.0), (2.0, 1.5), (1.0, 4.0), (0.5, 3.0), (-1.0, 1.2), (1.0, -4.0)] {
            let p = TwoLevelLossParams::new(omega, gamma).unwrap();
            let h = two_level_loss(p).unwrap().evaluate(0.0);
            let r = gamma * gamma / (4.0 * omega * omega);
            let lambda = if r < 1.0 { c((1.0 - r).sqrt(), 0.0) } else { c(0.0, (r - 1.0).sqrt()) };
            let expected = [c(0.0, -gamma / 4.0) + lambda * (omega / 2.0), c(0.0, -gamma / 4.0) - lambda * (omega / 2.0)];
            assert!(spectrum_distance(&eigenvalues(&h), &expected) < 1e-10, "ω={omega} γ={gamma}");
        }
    }

    #[test]
    fn bosonic_blocks() {
        let space = FockSpace::new(1);
        let h = two_mode_bosonic(TwoModeBosonicParams::new(0.0, 0.0, 1.0, 1).unwrap()).unwrap().evaluate(0.0);
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        let b1 = h.submatrix(&space.block(1));
        assert_eq!(b1, OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());

        let h = bosonic_matrix(&TwoModeBosonicParams::new(2.0, 0.0, 0.0, 1).unwrap());
        let i10 = space.index(1, 0).unwrap();
        let i01 = space.index(0, 1).unwrap();
        assert_eq!(h[(i10, i10)], c(0.0, -1.0));
        assert_eq!(h[(i01, i01)], c(0.0, 0.0));
        assert_eq!(h[(i10, i01)], c(0.0, 0.0));
    }

    #[test]
    fn bosonic_commutes_with_total_number() {
        for p in [(1.0, 0.0, 1.0, 4), (4.0, 0.0, 1.0, 5), (0.3, 2.0, -0.7, 3)] {
            let params = TwoModeBosonicParams::new(p.0, p.1, p.2, p.3).unwrap();
            let h = bosonic_matrix(&params);
            let n = FockSpace::new(params.n_max).number_total();
            assert!(h.commutator(&n).max_norm() <= 1e-14 * h.max_norm());
        }
    }

    #[test]
    fn bosonic_regimes() {
        let cls = |ga, gb, g| classify_bosonic_regime(&TwoModeBosonicParams::new(ga, gb, g, 2).unwrap(), 1e-9);
        assert_eq!(cls(4.0, 0.0, 1.0), BosonicRegime::Ep);
        assert_eq!(cls(0.0, 0.0, 1.0), BosonicRegime::NonEp);
        assert_eq!(cls(2.0, 0.0, 1.0), BosonicRegime::NonEp);
        assert!(TwoModeBosonicParams::new(1.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn custom_models() {
        let gamma = 0.8;
        let m = custom_model(1, move |_| OperatorMatrix::scalar(1, c(0.0, -gamma / 2.0)), "scalar loss").unwrap();
        assert_eq!(m.dim(), 1);
        assert!(custom_model(2, |_| OperatorMatrix::identity(3), "bad").is_err());
        assert!(custom_model(2, |_| OperatorMatrix::identity(2).scale_real(f64::INFINITY), "inf").is_err());

        let (delta, g) = (1.0, 1.0);
        let m = custom_model(
            2,
            move |_| &pauli::sigma_z().scale_real(delta / 2.0) + &pauli::sigma_x().scale_real(g),
            "interaction fixture",
        )
        .unwrap();
        assert!(is_hermitian(&m.evaluate(0.5), 0.0));
    }

    #[test]
    fn time_independent_models_are_constant() {
        let m = two_level_loss(TwoLevelLossParams::new(1.3, 0.4).unwrap()).unwrap();
        assert!(m.is_time_independent());
        let h0 = m.evaluate(0.0);
        for t in [0.1, 2.0, -3.0, 100.0] {
            assert_eq!(m.evaluate(t), h0);
        }
    }
}
