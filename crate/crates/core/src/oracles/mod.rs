//! Closed-form metrics and vielbeins for the catalog models, with hand-coded
//! time derivatives. These never touch the integrator and serve as the
//! ground truth for every numerical path.
//!
//! Conventions: two-level basis is (excited, ground); the constant metric
//! data satisfies `g = h†h`, which makes `E†E = G` hold term by term.

mod bosonic;

pub use bosonic::{
    bosonic_ep_modes, bosonic_gauge_generator, bosonic_gauge_unitary, bosonic_gauged_flat, bosonic_metric_closed_form,
    bosonic_metric_derivative, bosonic_normal_modes, bosonic_vielbein_closed_form, bosonic_vielbein_derivative,
    BosonicEpModes, BosonicNormalModes, CommutatorCheck,
};

use num_complex::Complex64 as C64;

use crate::error::{HermitizeError, Result};
use crate::models::{
    classify_regime, constant_operator, HamiltonianModel, Regime, TimeOperator, TwoLevelLossParams,
};
use crate::operator::{
    cholesky_upper, condition_number, matrix_exponential, pauli, OperatorMatrix, I, SINGULARITY_THRESHOLD,
};
use crate::vielbein::GaugeGenerator;

/// Parameters of the two-level closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub omega: f64,
    pub gamma: f64,
    /// Constant positive-definite metric data `g`.
    pub g_const: OperatorMatrix,
    /// Constant invertible vielbein data `h`, with `h†h = g`.
    pub h_const: OperatorMatrix,
    /// Branch `γ/(2ω)` at the exceptional point, `±1`.
    pub sign: f64,
    pub ep_tol: f64,
}

impl OracleParams {
    /// `h = g = I`.
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        let p = TwoLevelLossParams::new(omega, gamma)?;
        Ok(Self {
            omega,
            gamma,
            g_const: OperatorMatrix::identity(2),
            h_const: OperatorMatrix::identity(2),
            sign: (gamma / (2.0 * omega)).signum(),
            ep_tol: p.default_ep_tol(),
        })
    }

    /// Sets `h` and the matching `g = h†h`.
    pub fn with_h(mut self, h: OperatorMatrix) -> Result<Self> {
        if h.dim() != 2 {
            return Err(HermitizeError::Shape("h must be 2x2".into()));
        }
        let cond = condition_number(&h);
        if !(cond <= SINGULARITY_THRESHOLD) {
            return Err(HermitizeError::Singular { condition: cond });
        }
        self.g_const = h.adjoint().matmul(&h);
        self.h_const = h;
        Ok(self)
    }

    /// Sets `g` and a matching upper-triangular `h` with `h†h = g`.
    pub fn with_g(mut self, g: OperatorMatrix) -> Result<Self> {
        if g.dim() != 2 {
            return Err(HermitizeError::Shape("g must be 2x2".into()));
        }
        self.h_const = cholesky_upper(&g)?;
        self.g_const = g;
        Ok(self)
    }

    pub fn with_ep_tol(mut self, ep_tol: f64) -> Self {
        self.ep_tol = ep_tol;
        self
    }

    pub fn loss_params(&self) -> TwoLevelLossParams {
        TwoLevelLossParams { omega: self.omega, gamma: self.gamma }
    }

    pub fn regime(&self) -> Regime {
        classify_regime(&self.loss_params(), self.ep_tol)
    }

    fn require(&self, regime: Regime) -> Result<()> {
        let actual = self.regime();
        if actual != regime {
            return Err(HermitizeError::Regime(format!("closed form is for the {regime} regime, parameters are {actual}")));
        }
        Ok(())
    }

    /// `γ/(2ω)`.
    fn ratio(&self) -> f64 {
        self.gamma / (2.0 * self.omega)
    }

    /// `λ_<` or `λ_>` for the current regime.
    pub fn lambda(&self) -> f64 {
        let r = self.ratio();
        match self.regime() {
            Regime::Underdamped => (1.0 - r * r).sqrt(),
            Regime::Overdamped => (r * r - 1.0).sqrt(),
            Regime::ExceptionalPoint => 0.0,
        }
    }
}

fn m2(a: C64, b: C64, c: C64, d: C64) -> OperatorMatrix {
    OperatorMatrix::from_rows(&[vec![a, b], vec![c, d]]).expect("finite 2x2 entries")
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Right factor `M(t)` of the underdamped closed form and its derivative.
fn underdamped_factor(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (l, r, w) = (p.lambda(), p.ratio(), p.omega);
    let f = (I * (l * w * t / 2.0)).exp();
    let fc = f.conj();
    let m = m2(f, (I * r + l) * f, fc, (I * r - l) * fc);
    let (up, down) = (I * (l * w / 2.0), -I * (l * w / 2.0));
    let dm = m2(up * m[(0, 0)], up * m[(0, 1)], down * m[(1, 0)], down * m[(1, 1)]);
    (m, dm)
}

/// Left factor of the underdamped metric display, as printed.
fn underdamped_left(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (l, r, w) = (p.lambda(), p.ratio(), p.omega);
    let f = (I * (l * w * t / 2.0)).exp();
    let fc = f.conj();
    let left = m2(fc, f, (-I * r + l) * fc, (-I * r - l) * f);
    let (df, dfc) = (I * (l * w / 2.0), -I * (l * w / 2.0));
    let dleft = m2(dfc * left[(0, 0)], df * left[(0, 1)], dfc * left[(1, 0)], df * left[(1, 1)]);
    (left, dleft)
}

fn overdamped_factor(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (l, r, w) = (p.lambda(), p.ratio(), p.omega);
    let fp = re((l * w * t / 2.0).exp());
    let fm = re((-l * w * t / 2.0).exp());
    let m = m2(fp, I * (r - l) * fp, fm, I * (r + l) * fm);
    let (up, down) = (re(l * w / 2.0), re(-l * w / 2.0));
    let dm = m2(up * m[(0, 0)], up * m[(0, 1)], down * m[(1, 0)], down * m[(1, 1)]);
    (m, dm)
}

fn overdamped_left(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (l, r, w) = (p.lambda(), p.ratio(), p.omega);
    let fp = re((l * w * t / 2.0).exp());
    let fm = re((-l * w * t / 2.0).exp());
    let left = m2(fp, fm, -I * (r - l) * fp, -I * (r + l) * fm);
    let (up, down) = (re(l * w / 2.0), re(-l * w / 2.0));
    let dleft = m2(up * left[(0, 0)], down * left[(0, 1)], up * left[(1, 0)], down * left[(1, 1)]);
    (left, dleft)
}

fn ep_factor(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (s, w) = (p.sign, p.omega);
    let n = m2(re(1.0), I * s, re(2.0 * w * t), I * (s * 2.0 * w * t - 4.0));
    let dn = m2(re(0.0), re(0.0), re(2.0 * w), I * (2.0 * s * w));
    (n, dn)
}

fn ep_left(p: &OracleParams, t: f64) -> (OperatorMatrix, OperatorMatrix) {
    let (s, w) = (p.sign, p.omega);
    let left = m2(re(1.0), re(2.0 * w * t), -I * s, -I * (s * 2.0 * w * t - 4.0));
    let dleft = m2(re(0.0), re(2.0 * w), re(0.0), -I * (2.0 * s * w));
    (left, dleft)
}

/// `(sI − iσx)ω/2`, the exponent rate of the exceptional-point prefactor.
fn ep_generator(p: &OracleParams) -> OperatorMatrix {
    (&OperatorMatrix::identity(2).scale_real(p.sign) - &pauli::sigma_x().scale(I)).scale_real(p.omega / 2.0)
}

/// `e^{ct}·L·g·R` and its derivative.
fn sandwich(
    c: f64,
    t: f64,
    (l, dl): (OperatorMatrix, OperatorMatrix),
    g: &OperatorMatrix,
    (r, dr): (OperatorMatrix, OperatorMatrix),
) -> (OperatorMatrix, OperatorMatrix) {
    let pref = (c * t).exp();
    let core = l.matmul(g).matmul(&r);
    let dcore = &dl.matmul(g).matmul(&r) + &l.matmul(g).matmul(&dr);
    let value = core.scale_real(pref);
    let deriv = &value.scale_real(c) + &dcore.scale_real(pref);
    (value, deriv)
}

fn metric_pair(p: &OracleParams, t: f64, regime: Regime) -> Result<(OperatorMatrix, OperatorMatrix)> {
    p.require(regime)?;
    Ok(match regime {
        Regime::Underdamped => {
            sandwich(p.gamma / 2.0, t, underdamped_left(p, t), &p.g_const, underdamped_factor(p, t))
        }
        Regime::Overdamped => sandwich(p.gamma / 2.0, t, overdamped_left(p, t), &p.g_const, overdamped_factor(p, t)),
        Regime::ExceptionalPoint => sandwich(p.sign * p.omega, t, ep_left(p, t), &p.g_const, ep_factor(p, t)),
    })
}

fn vielbein_pair(p: &OracleParams, t: f64, regime: Regime) -> Result<(OperatorMatrix, OperatorMatrix)> {
    p.require(regime)?;
    let h = &p.h_const;
    Ok(match regime {
        Regime::Underdamped | Regime::Overdamped => {
            let (m, dm) = if regime == Regime::Underdamped { underdamped_factor(p, t) } else { overdamped_factor(p, t) };
            let c = p.gamma / 4.0;
            let pref = (c * t).exp();
            let e = h.matmul(&m).scale_real(pref);
            let de = &e.scale_real(c) + &h.matmul(&dm).scale_real(pref);
            (e, de)
        }
        Regime::ExceptionalPoint => {
            let gen = ep_generator(p);
            let pre = matrix_exponential(&gen.scale_real(t))?;
            let (n, dn) = ep_factor(p, t);
            let hn = h.matmul(&n);
            let e = pre.matmul(&hn);
            let de = &gen.matmul(&e) + &pre.matmul(&h.matmul(&dn));
            (e, de)
        }
    })
}

pub fn metric_closed_form_underdamped(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t, Regime::Underdamped)?.0)
}

pub fn metric_closed_form_overdamped(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t, Regime::Overdamped)?.0)
}

pub fn metric_closed_form_ep(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t, Regime::ExceptionalPoint)?.0)
}

pub fn vielbein_closed_form_underdamped(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t, Regime::Underdamped)?.0)
}

pub fn vielbein_closed_form_overdamped(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t, Regime::Overdamped)?.0)
}

pub fn vielbein_closed_form_ep(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t, Regime::ExceptionalPoint)?.0)
}

/// Closed-form metric for whichever regime the parameters fall in.
pub fn metric_closed_form(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t, p.regime())?.0)
}

/// Hand-differentiated `∂ₜG` of the closed-form metric.
pub fn metric_derivative(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t, p.regime())?.1)
}

/// Closed-form vielbein for whichever regime the parameters fall in.
pub fn vielbein_closed_form(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t, p.regime())?.0)
}

/// Hand-differentiated `∂ₜE` of the closed-form vielbein.
pub fn vielbein_derivative(p: &OracleParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t, p.regime())?.1)
}

/// Induced Hamiltonian of the closed-form vielbein: zero away from the
/// exceptional point, `ωσx/2` at it.
pub fn oracle_flat_hamiltonian(p: &OracleParams) -> OperatorMatrix {
    match p.regime() {
        Regime::ExceptionalPoint => pauli::sigma_x().scale_real(p.omega / 2.0),
        _ => OperatorMatrix::zeros(2),
    }
}

pub fn oracle_flat_target(p: &OracleParams) -> TimeOperator {
    constant_operator(oracle_flat_hamiltonian(p))
}

/// A printed gauge move: the generator, its closed-form unitary, and the
/// induced Hamiltonian it produces from the closed-form frame.
#[derive(Debug, Clone)]
pub struct GaugeMove {
    pub generator: GaugeGenerator,
    pub expected_flat: OperatorMatrix,
    omega_t_sign: f64,
    omega: f64,
}

impl GaugeMove {
    /// `U(t) = exp(∓iωtσx/2)`.
    pub fn unitary(&self, t: f64) -> Result<OperatorMatrix> {
        matrix_exponential(&pauli::sigma_x().scale(I * (self.omega_t_sign * self.omega * t / 2.0)))
    }
}

/// `U = exp(−iωtσx/2)` away from the exceptional point (giving `ωσx/2`),
/// `U = exp(iωtσx/2)` at it (giving zero).
pub fn printed_gauge_move(p: &OracleParams) -> Result<GaugeMove> {
    let half_sx = pauli::sigma_x().scale_real(p.omega / 2.0);
    let zero = constant_operator(OperatorMatrix::zeros(2));
    let (h_left, sign, expected) = match p.regime() {
        Regime::ExceptionalPoint => (half_sx.scale_real(-1.0), 1.0, OperatorMatrix::zeros(2)),
        _ => (half_sx.clone(), -1.0, half_sx),
    };
    let generator = GaugeGenerator::new(constant_operator(h_left), zero, OperatorMatrix::identity(2))?;
    Ok(GaugeMove { generator, expected_flat: expected, omega_t_sign: sign, omega: p.omega })
}

/// Model matching the oracle parameters.
pub fn oracle_model(p: &OracleParams) -> Result<HamiltonianModel> {
    crate::models::two_level_loss(p.loss_params())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_rhs;
    use crate::operator::{eigh, is_hermitian};
    use crate::vielbein::{coevolution_rhs, induced_hamiltonian};

    fn regimes() -> Vec<OracleParams> {
        let h = m2(re(1.2), C64::new(0.3, -0.4), re(0.1), C64::new(0.8, 0.2));
        let mut out = Vec::new();
        for (w, g) in [(1.0, 1.0), (1.0, 0.0), (2.0, -1.5), (1.0, 4.0), (0.5, -3.0), (1.0, 2.0), (1.0, -2.0), (-1.5, 3.0)] {
            out.push(OracleParams::new(w, g).unwrap());
            out.push(OracleParams::new(w, g).unwrap().with_h(h.clone()).unwrap());
        }
        out
    }

    fn times() -> Vec<f64> {
        (0..50).map(|k| 0.1 * k as f64).collect()
    }

    #[test]
    fn underdamped_hermitian_limit_is_constant() {
        let p = OracleParams::new(1.0, 0.0).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let g = metric_closed_form_underdamped(&p, t).unwrap();
            assert!(g.distance(&OperatorMatrix::identity(2).scale_real(2.0)) < 1e-14);
        }
    }

    #[test]
    fn underdamped_initial_values() {
        let p = OracleParams::new(1.0, 1.0).unwrap();
        let l = 3f64.sqrt() / 2.0;
        let m0 = m2(re(1.0), C64::new(l, 0.5), re(1.0), C64::new(-l, 0.5));
        assert!((p.lambda() - l).abs() < 1e-15);
        assert!(vielbein_closed_form_underdamped(&p, 0.0).unwrap().distance(&m0) < 1e-15);
        let g0 = m0.adjoint().matmul(&m0);
        assert!(metric_closed_form_underdamped(&p, 0.0).unwrap().distance(&g0) < 1e-15);
        for k in 0..100 {
            let t = 5.0 * k as f64 / 99.0;
            assert!(eigh(&metric_closed_form_underdamped(&p, t).unwrap()).values[0] > 0.0);
        }
    }

    #[test]
    fn overdamped_lambda_and_ep_initial_value() {
        assert!((OracleParams::new(1.0, 4.0).unwrap().lambda() - 3f64.sqrt()).abs() < 1e-15);
        let p = OracleParams::new(1.0, 2.0).unwrap();
        let e0 = vielbein_closed_form_ep(&p, 0.0).unwrap();
        assert!(e0.distance(&m2(re(1.0), I, re(0.0), C64::new(0.0, -4.0))) < 1e-15);
    }

    #[test]
    fn wrong_regime_is_an_error() {
        let p = OracleParams::new(1.0, 4.0).unwrap();
        assert!(matches!(metric_closed_form_underdamped(&p, 0.0), Err(HermitizeError::Regime(_))));
        assert!(vielbein_closed_form_ep(&p, 0.0).is_err());
        assert!(vielbein_closed_form_overdamped(&OracleParams::new(1.0, 1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn vielbeins_factor_the_printed_metrics() {
        for p in regimes() {
            for t in [0.0, 1.3, 2.9] {
                let e = vielbein_closed_form(&p, t).unwrap();
                let g = metric_closed_form(&p, t).unwrap();
                let scale = g.max_norm();
                assert!(e.adjoint().matmul(&e).distance(&g) <= 1e-12 * scale, "{p:?} t={t}");
                assert!(is_hermitian(&g, 1e-12 * scale));
            }
        }
    }

    #[test]
    fn vielbeins_solve_their_defining_equation() {
        for p in regimes() {
            let h = oracle_model(&p).unwrap().evaluate(0.0);
            let flat = oracle_flat_hamiltonian(&p);
            for t in times() {
                let e = vielbein_closed_form(&p, t).unwrap();
                let de = vielbein_derivative(&p, t).unwrap();
                let scale = 1.0 + de.max_norm();
                assert!(de.distance(&coevolution_rhs(&e, &flat, &h)) <= 1e-9 * scale, "{p:?} t={t}");
                let hf = induced_hamiltonian(&e, &de, &h).unwrap();
                assert!(hf.distance(&flat) <= 1e-9, "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn underdamped_induced_hamiltonian_vanishes() {
        let p = OracleParams::new(1.0, 1.0).unwrap();
        let h = oracle_model(&p).unwrap().evaluate(0.0);
        for t in [0.0, 1.3, 4.0] {
            let hf =
                induced_hamiltonian(&vielbein_closed_form(&p, t).unwrap(), &vielbein_derivative(&p, t).unwrap(), &h).unwrap();
            assert!(hf.max_norm() < 1e-12);
        }
    }

    #[test]
    fn metrics_solve_the_metric_flow() {
        for p in regimes() {
            let h = oracle_model(&p).unwrap().evaluate(0.0);
            for t in times() {
                let g = metric_closed_form(&p, t).unwrap();
                let dg = metric_derivative(&p, t).unwrap();
                let scale = 1.0 + dg.max_norm();
                assert!(dg.distance(&metric_rhs(&g, &h)) <= 1e-9 * scale, "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn g_and_h_stay_consistent() {
        let g = m2(re(2.0), C64::new(0.5, 0.5), C64::new(0.5, -0.5), re(1.0));
        let p = OracleParams::new(1.0, 1.0).unwrap().with_g(g.clone()).unwrap();
        assert!(p.h_const.adjoint().matmul(&p.h_const).distance(&g) < 1e-15);
        assert!(OracleParams::new(1.0, 1.0).unwrap().with_g(OperatorMatrix::real_diagonal(&[1.0, -1.0])).is_err());
        assert!(OracleParams::new(1.0, 1.0).unwrap().with_h(OperatorMatrix::real_diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn printed_gauge_unitaries_match_generators() {
        for p in [OracleParams::new(1.0, 1.0).unwrap(), OracleParams::new(1.0, 2.0).unwrap()] {
            let mv = printed_gauge_move(&p).unwrap();
            let t = 0.9;
            let u = mv.unitary(t).unwrap();
            let du = mv.generator.rhs(t, &u);
            // Derivative of exp(cσx t) is cσx·U.
            let c = I * (mv.omega_t_sign * p.omega / 2.0);
            assert!(du.distance(&pauli::sigma_x().scale(c).matmul(&u)) < 1e-14);
        }
    }
}
