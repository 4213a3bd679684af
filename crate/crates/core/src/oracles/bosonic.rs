//! Closed forms for the two-mode bosonic model on the truncated Fock space.
//!
//! Ket factors `(a†)^{n₋}(b†)^{n₊}|0⟩` and bra factors `⟨0|X` are built
//! exactly for `n₊ + n₋ ≤ n_max`; bras are formed as `(X†|0⟩)†`. Expansion
//! weights `h_{n₊n₋}` are all one.

use num_complex::Complex64 as C64;

use crate::error::{HermitizeError, Result};
use crate::fock::FockSpace;
use crate::models::{bosonic_matrix, classify_bosonic_regime, constant_operator, BosonicRegime, TwoModeBosonicParams};
use crate::operator::{OperatorMatrix, StateVector, I};
use crate::vielbein::GaugeGenerator;

/// Residual of one operator identity, measured on columns below the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorCheck {
    pub relation: &'static str,
    pub residual: f64,
}

fn commutator_check(
    space: &FockSpace,
    relation: &'static str,
    lhs: &OperatorMatrix,
    rhs: &OperatorMatrix,
) -> CommutatorCheck {
    CommutatorCheck { relation, residual: FockSpace::column_distance(lhs, rhs, &space.interior()) }
}

/// Normal-mode ladder operators away from the exceptional point.
#[derive(Debug, Clone)]
pub struct BosonicNormalModes {
    pub zeta: C64,
    pub h_plus: C64,
    pub h_minus: C64,
    pub c_plus_c: OperatorMatrix,
    pub c_minus_c: OperatorMatrix,
    pub c_plus_a: OperatorMatrix,
    pub c_minus_a: OperatorMatrix,
    space: FockSpace,
    hamiltonian: OperatorMatrix,
}

fn require_coupling(p: &TwoModeBosonicParams) -> Result<()> {
    if p.g == 0.0 {
        return Err(HermitizeError::Parameter("the bosonic closed forms need g ≠ 0".into()));
    }
    Ok(())
}

/// `ζ = (16g² − (γa − γb)²)^{1/2}` (principal branch), normal-mode
/// frequencies `h± = −i(γa + γb)/4 ∓ ζ/4`, and the mode operators.
pub fn bosonic_normal_modes(p: &TwoModeBosonicParams) -> Result<BosonicNormalModes> {
    require_coupling(p)?;
    if classify_bosonic_regime(p, p.default_ep_tol()) == BosonicRegime::Ep {
        return Err(HermitizeError::Regime("parameters sit at the exceptional point; use the EP modes".into()));
    }
    let space = FockSpace::new(p.n_max);
    let (a, b, ad, bd) = (space.annihilate_a(), space.annihilate_b(), space.create_a(), space.create_b());
    let delta = p.gamma_a - p.gamma_b;
    let zeta = C64::new(16.0 * p.g * p.g - delta * delta, 0.0).sqrt();
    let loss = C64::new(0.0, -(p.gamma_a + p.gamma_b) / 4.0);
    let (h_plus, h_minus) = (loss - zeta / 4.0, loss + zeta / 4.0);

    let creation = |s: f64| &ad - &bd.scale(s * (zeta - I * (s * delta)) / (4.0 * p.g));
    let annihilation =
        |s: f64| (&a.scale((zeta + I * (s * delta)) / 2.0) - &b.scale(C64::new(s * 2.0 * p.g, 0.0))).scale(1.0 / zeta);
    Ok(BosonicNormalModes {
        zeta,
        h_plus,
        h_minus,
        c_plus_c: creation(1.0),
        c_minus_c: creation(-1.0),
        c_plus_a: annihilation(1.0),
        c_minus_a: annihilation(-1.0),
        hamiltonian: bosonic_matrix(p),
        space,
    })
}

impl BosonicNormalModes {
    pub fn check_commutators(&self) -> Vec<CommutatorCheck> {
        let id = OperatorMatrix::identity(self.space.dim());
        let zero = OperatorMatrix::zeros(self.space.dim());
        let h = &self.hamiltonian;
        vec![
            commutator_check(&self.space, "[c+a, c+c] = 1", &self.c_plus_a.commutator(&self.c_plus_c), &id),
            commutator_check(&self.space, "[c-a, c-c] = 1", &self.c_minus_a.commutator(&self.c_minus_c), &id),
            commutator_check(&self.space, "[c+a, c-c] = 0", &self.c_plus_a.commutator(&self.c_minus_c), &zero),
            commutator_check(&self.space, "[c-a, c+c] = 0", &self.c_minus_a.commutator(&self.c_plus_c), &zero),
            commutator_check(&self.space, "[H, c+c] = h+ c+c", &h.commutator(&self.c_plus_c), &self.c_plus_c.scale(self.h_plus)),
            commutator_check(
                &self.space,
                "[H, c-c] = h- c-c",
                &h.commutator(&self.c_minus_c),
                &self.c_minus_c.scale(self.h_minus),
            ),
            commutator_check(
                &self.space,
                "[H, c+a] = -h+ c+a",
                &h.commutator(&self.c_plus_a),
                &self.c_plus_a.scale(-self.h_plus),
            ),
            commutator_check(
                &self.space,
                "[H, c-a] = -h- c-a",
                &h.commutator(&self.c_minus_a),
                &self.c_minus_a.scale(-self.h_minus),
            ),
        ]
    }
}

/// Mode operators at the exceptional point `γa − γb = 4χg`:
/// `d₊ᶜ = (a† + iχb†)/√2`, `d₊ᵃ = (a − iχb)/√2`,
/// `d₋ᶜ = −χ(a† − iχb†)/√2`, `d₋ᵃ = −χ(a + iχb)/√2`.
#[derive(Debug, Clone)]
pub struct BosonicEpModes {
    pub chi: f64,
    /// `(γa + γb)/4`.
    pub delta_gamma: f64,
    pub d_plus_c: OperatorMatrix,
    pub d_minus_c: OperatorMatrix,
    pub d_plus_a: OperatorMatrix,
    pub d_minus_a: OperatorMatrix,
    g: f64,
    space: FockSpace,
    hamiltonian: OperatorMatrix,
}

pub fn bosonic_ep_modes(p: &TwoModeBosonicParams) -> Result<BosonicEpModes> {
    require_coupling(p)?;
    if classify_bosonic_regime(p, p.default_ep_tol()) != BosonicRegime::Ep {
        return Err(HermitizeError::Regime("parameters are away from the exceptional point".into()));
    }
    let space = FockSpace::new(p.n_max);
    let (a, b, ad, bd) = (space.annihilate_a(), space.annihilate_b(), space.create_a(), space.create_b());
    let chi = ((p.gamma_a - p.gamma_b) / (4.0 * p.g)).signum();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ic = I * chi;
    Ok(BosonicEpModes {
        chi,
        delta_gamma: (p.gamma_a + p.gamma_b) / 4.0,
        d_plus_c: (&ad + &bd.scale(ic)).scale_real(r),
        d_plus_a: (&a - &b.scale(ic)).scale_real(r),
        d_minus_c: (&ad - &bd.scale(ic)).scale_real(-chi * r),
        d_minus_a: (&a + &b.scale(ic)).scale_real(-chi * r),
        g: p.g,
        hamiltonian: bosonic_matrix(p),
        space,
    })
}

impl BosonicEpModes {
    pub fn check_commutators(&self) -> Vec<CommutatorCheck> {
        let id = OperatorMatrix::identity(self.space.dim());
        let zero = OperatorMatrix::zeros(self.space.dim());
        let h = &self.hamiltonian;
        let dg = C64::new(0.0, self.delta_gamma);
        let two_ig = C64::new(0.0, 2.0 * self.g);
        let (pc, mc, pa, ma) = (&self.d_plus_c, &self.d_minus_c, &self.d_plus_a, &self.d_minus_a);
        let decomposition = (&pc.matmul(pa) + &mc.matmul(ma)).scale(-dg).add_scaled(1.0, &pc.matmul(ma).scale(two_ig));
        vec![
            commutator_check(&self.space, "[d+a, d+c] = 1", &pa.commutator(pc), &id),
            commutator_check(&self.space, "[d-a, d-c] = 1", &ma.commutator(mc), &id),
            commutator_check(&self.space, "[d+a, d-c] = 0", &pa.commutator(mc), &zero),
            commutator_check(&self.space, "[d-a, d+c] = 0", &ma.commutator(pc), &zero),
            commutator_check(&self.space, "[H, d+c] = -iΔγ d+c", &h.commutator(pc), &pc.scale(-dg)),
            commutator_check(
                &self.space,
                "[H, d-c] = -iΔγ d-c + 2ig d+c",
                &h.commutator(mc),
                &(&mc.scale(-dg) + &pc.scale(two_ig)),
            ),
            commutator_check(
                &self.space,
                "[H, d+a] = iΔγ d+a - 2ig d-a",
                &h.commutator(pa),
                &(&pa.scale(dg) - &ma.scale(two_ig)),
            ),
            commutator_check(&self.space, "[H, d-a] = iΔγ d-a", &h.commutator(ma), &ma.scale(dg)),
            commutator_check(&self.space, "H = d-mode decomposition", h, &decomposition),
        ]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `ops[0]^{k0} ops[1]^{k1} … |v⟩`, applying the last factor first.
fn apply_powers(factors: &[(&OperatorMatrix, usize)], v: StateVector) -> StateVector {
    factors.iter().rev().fold(v, |acc, &(op, k)| (0..k).fold(acc, |x, _| op.apply(&x)))
}

fn outer(ket: &StateVector, bra_dual: &StateVector) -> OperatorMatrix {
    let n = ket.len();
    OperatorMatrix::from_fn(n, |i, j| ket[i] * bra_dual[j].conj())
}

fn pairs(n_max: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=n_max).flat_map(move |n| (0..=n).map(move |np| (np, n - np)))
}

/// `(a†)^{n₋}(b†)^{n₊}|0⟩`.
fn ket(space: &FockSpace, n_plus: usize, n_minus: usize) -> StateVector {
    let (ad, bd) = (space.create_a(), space.create_b());
    apply_powers(&[(&ad, n_minus), (&bd, n_plus)], space.vacuum())
}

enum Pieces {
    NonEp(BosonicNormalModes),
    Ep(BosonicEpModes),
}

fn pieces(p: &TwoModeBosonicParams) -> Result<Pieces> {
    require_coupling(p)?;
    Ok(match classify_bosonic_regime(p, p.default_ep_tol()) {
        BosonicRegime::NonEp => Pieces::NonEp(bosonic_normal_modes(p)?),
        BosonicRegime::Ep => Pieces::Ep(bosonic_ep_modes(p)?),
    })
}

/// Dual vector `w` of the bra factor (the bra is `w†`) and its time
/// derivative.
fn bra_dual(pieces: &Pieces, space: &FockSpace, n_plus: usize, n_minus: usize, t: f64) -> (StateVector, StateVector) {
    match pieces {
        Pieces::NonEp(m) => {
            let (cpd, cmd) = (m.c_plus_a.adjoint(), m.c_minus_a.adjoint());
            let w = apply_powers(&[(&cmd, n_minus), (&cpd, n_plus)], space.vacuum());
            (w, StateVector::zeros(space.dim()))
        }
        Pieces::Ep(m) => {
            let dd = m.d_minus_a.adjoint();
            let bd = (&m.d_plus_a - &m.d_minus_a.scale_real(2.0 * m.g * t)).adjoint();
            let w = apply_powers(&[(&dd, n_minus), (&bd, n_plus)], space.vacuum());
            let dw = if n_plus == 0 {
                StateVector::zeros(space.dim())
            } else {
                apply_powers(&[(&dd, n_minus + 1), (&bd, n_plus - 1)], space.vacuum())
                    .scale(C64::new(-2.0 * m.g * n_plus as f64, 0.0))
            };
            (w, dw)
        }
    }
}

/// Time factor of the `(n₊, n₋)` vielbein term and its logarithmic rate.
fn vielbein_phase(pieces: &Pieces, n_plus: usize, n_minus: usize, t: f64) -> (C64, C64) {
    let (np, nm) = (n_plus as f64, n_minus as f64);
    let rate = match pieces {
        Pieces::NonEp(m) => I * (m.h_plus * np + m.h_minus * nm),
        Pieces::Ep(m) => C64::new(m.delta_gamma * (np + nm), 0.0),
    };
    ((rate * t).exp(), rate)
}

fn vielbein_pair(p: &TwoModeBosonicParams, t: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let pieces = pieces(p)?;
    let space = FockSpace::new(p.n_max);
    let mut e = OperatorMatrix::zeros(space.dim());
    let mut de = OperatorMatrix::zeros(space.dim());
    for (np, nm) in pairs(p.n_max) {
        let norm = (factorial(np) * factorial(nm)).powf(1.5);
        let (phase, rate) = vielbein_phase(&pieces, np, nm, t);
        let k = ket(&space, np, nm);
        let (w, dw) = bra_dual(&pieces, &space, np, nm, t);
        let term = outer(&k, &w).scale(phase / norm);
        de += &term.scale(rate);
        de += &outer(&k, &dw).scale(phase / norm);
        e += &term;
    }
    Ok((e, de))
}

/// Vielbein with `H♭ = 0` in either regime.
pub fn bosonic_vielbein_closed_form(p: &TwoModeBosonicParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t)?.0)
}

/// Hand-differentiated `∂ₜE` of [`bosonic_vielbein_closed_form`].
pub fn bosonic_vielbein_derivative(p: &TwoModeBosonicParams, t: f64) -> Result<OperatorMatrix> {
    Ok(vielbein_pair(p, t)?.1)
}

fn metric_pair(p: &TwoModeBosonicParams, t: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let pieces = pieces(p)?;
    let space = FockSpace::new(p.n_max);
    let mut g = OperatorMatrix::zeros(space.dim());
    let mut dg = OperatorMatrix::zeros(space.dim());
    for (np, nm) in pairs(p.n_max) {
        let norm = (factorial(np) * factorial(nm)).powi(2);
        let (np_f, nm_f) = (np as f64, nm as f64);
        let rate = match &pieces {
            Pieces::NonEp(m) => -2.0 * (np_f * m.h_plus.im + nm_f * m.h_minus.im),
            Pieces::Ep(m) => 2.0 * m.delta_gamma * (np_f + nm_f),
        };
        let weight = (rate * t).exp() / norm;
        let (w, dw) = bra_dual(&pieces, &space, np, nm, t);
        let term = outer(&w, &w).scale_real(weight);
        dg += &term.scale_real(rate);
        dg += &(&outer(&dw, &w) + &outer(&w, &dw)).scale_real(weight);
        g += &term;
    }
    Ok((g, dg))
}

/// Metric `Σ g/(n₊!² n₋!²)·(time factor)·|w⟩⟨w|` with unit `g_{n₊n₋}`.
pub fn bosonic_metric_closed_form(p: &TwoModeBosonicParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t)?.0)
}

pub fn bosonic_metric_derivative(p: &TwoModeBosonicParams, t: f64) -> Result<OperatorMatrix> {
    Ok(metric_pair(p, t)?.1)
}

/// Gauge unitary mapping `|m, n⟩` to `e^{−itg(m−n)}` times the normalized
/// state `((a† + b†)/√2)^m ((a† − b†)/√2)^n |0⟩ / √(m! n!)`.
pub fn bosonic_gauge_unitary(p: &TwoModeBosonicParams, t: f64) -> OperatorMatrix {
    let space = FockSpace::new(p.n_max);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = (&space.create_a() + &space.create_b()).scale_real(r);
    let minus = (&space.create_a() - &space.create_b()).scale_real(r);
    let mut u = OperatorMatrix::zeros(space.dim());
    for (k, &(m, n)) in space.states().iter().enumerate() {
        let image = apply_powers(&[(&plus, m), (&minus, n)], space.vacuum());
        let phase = (I * (-t * p.g * (m as f64 - n as f64))).exp() / (factorial(m) * factorial(n)).sqrt();
        for i in 0..space.dim() {
            u[(i, k)] = image[i] * phase;
        }
    }
    u
}

/// Generator of [`bosonic_gauge_unitary`]: `H_L = 0`, `H_R = −g(a†a − b†b)`.
pub fn bosonic_gauge_generator(p: &TwoModeBosonicParams) -> Result<GaugeGenerator> {
    let space = FockSpace::new(p.n_max);
    let h_right = (&space.number_a() - &space.number_b()).scale_real(-p.g);
    GaugeGenerator::new(
        constant_operator(OperatorMatrix::zeros(space.dim())),
        constant_operator(h_right),
        bosonic_gauge_unitary(p, 0.0),
    )
}

/// `g(a†b + ab†)`, the induced Hamiltonian after the gauge.
pub fn bosonic_gauged_flat(p: &TwoModeBosonicParams) -> OperatorMatrix {
    let space = FockSpace::new(p.n_max);
    let hop = space.create_a().matmul(&space.annihilate_b());
    (&hop + &hop.adjoint()).scale_real(p.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::metric_rhs;
    use crate::operator::unitarity_residual;
    use crate::vielbein::{coevolution_rhs, induced_hamiltonian};

    fn non_ep() -> Vec<TwoModeBosonicParams> {
        vec![
            TwoModeBosonicParams::new(1.0, 0.0, 1.0, 4).unwrap(),
            TwoModeBosonicParams::new(0.0, 0.0, 1.0, 3).unwrap(),
            TwoModeBosonicParams::new(6.0, 0.5, 1.0, 3).unwrap(),
            TwoModeBosonicParams::new(0.3, 1.1, -0.7, 3).unwrap(),
        ]
    }

    fn ep() -> Vec<TwoModeBosonicParams> {
        vec![
            TwoModeBosonicParams::new(4.0, 0.0, 1.0, 4).unwrap(),
            TwoModeBosonicParams::new(0.0, 4.0, 1.0, 3).unwrap(),
            TwoModeBosonicParams::new(3.0, 1.0, 0.5, 3).unwrap(),
        ]
    }

    #[test]
    fn hermitian_limit_modes() {
        let m = bosonic_normal_modes(&TwoModeBosonicParams::new(0.0, 0.0, 1.0, 2).unwrap()).unwrap();
        assert!((m.zeta - C64::new(4.0, 0.0)).norm() < 1e-15);
        assert!((m.h_plus - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((m.h_minus - C64::new(1.0, 0.0)).norm() < 1e-15);
        let space = FockSpace::new(2);
        assert!(m.c_plus_c.distance(&(&space.create_a() - &space.create_b())) < 1e-15);
        assert!(m.c_minus_c.distance(&(&space.create_a() + &space.create_b())) < 1e-15);
    }

    #[test]
    fn printed_relations_hold_below_cutoff() {
        for p in non_ep() {
            for c in bosonic_normal_modes(&p).unwrap().check_commutators() {
                assert!(c.residual <= 1e-12, "{p:?}: {} residual {}", c.relation, c.residual);
            }
        }
        for p in ep() {
            for c in bosonic_ep_modes(&p).unwrap().check_commutators() {
                assert!(c.residual <= 1e-12, "{p:?}: {} residual {}", c.relation, c.residual);
            }
        }
    }

    #[test]
    fn regime_mismatch_is_reported() {
        assert!(matches!(bosonic_normal_modes(&ep()[0]), Err(HermitizeError::Regime(_))));
        assert!(matches!(bosonic_ep_modes(&non_ep()[0]), Err(HermitizeError::Regime(_))));
        assert!(bosonic_vielbein_closed_form(&TwoModeBosonicParams::new(1.0, 0.0, 0.0, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn vacuum_element_is_one() {
        for p in non_ep().into_iter().chain(ep()) {
            for t in [0.0, 1.7] {
                assert!((bosonic_vielbein_closed_form(&p, t).unwrap()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn vielbeins_have_vanishing_induced_hamiltonian() {
        for p in non_ep().into_iter().chain(ep()) {
            let h = bosonic_matrix(&p);
            let zero = OperatorMatrix::zeros(h.dim());
            for t in [0.0, 0.4, 1.3, 2.5] {
                let e = bosonic_vielbein_closed_form(&p, t).unwrap();
                let de = bosonic_vielbein_derivative(&p, t).unwrap();
                let scale = 1.0 + de.max_norm();
                let r1 = de.distance(&coevolution_rhs(&e, &zero, &h));
                let r2 = induced_hamiltonian(&e, &de, &h).unwrap().max_norm();
                assert!(r1 <= 1e-9 * scale, "{p:?} t={t} ode {r1} scale {scale}");
                let cond = crate::operator::condition_number(&e);
                assert!(r2 <= 1e-9 + 1e-15 * cond, "{p:?} t={t} flat {r2} cond {cond}");
            }
        }
    }

    #[test]
    fn metrics_match_vielbeins_and_flow() {
        for p in non_ep().into_iter().chain(ep()) {
            let h = bosonic_matrix(&p);
            for t in [0.0, 0.6, 1.9] {
                let e = bosonic_vielbein_closed_form(&p, t).unwrap();
                let g = bosonic_metric_closed_form(&p, t).unwrap();
                assert!(e.adjoint().matmul(&e).distance(&g) <= 1e-12 * g.max_norm(), "{p:?} t={t}");
                let dg = bosonic_metric_derivative(&p, t).unwrap();
                assert!(dg.distance(&metric_rhs(&g, &h)) <= 1e-9 * (1.0 + dg.max_norm()), "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn gauge_unitary_and_generator() {
        let p = TwoModeBosonicParams::new(1.0, 0.0, 1.0, 3).unwrap();
        let gen = bosonic_gauge_generator(&p).unwrap();
        for t in [0.0, 0.8, 2.1] {
            let u = bosonic_gauge_unitary(&p, t);
            assert!(unitarity_residual(&u) < 1e-14);
            let dt = 1e-6;
            let fd = (&bosonic_gauge_unitary(&p, t + dt) - &bosonic_gauge_unitary(&p, t - dt)).scale_real(0.5 / dt);
            assert!(fd.distance(&gen.rhs(t, &u)) < 1e-8);
        }
    }

    #[test]
    fn single_excitation_hopping() {
        let p = TwoModeBosonicParams::new(0.0, 0.0, 1.0, 1).unwrap();
        let flat = bosonic_gauged_flat(&p);
        assert_eq!(flat.submatrix(&[1, 2]), OperatorMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());
    }
}
