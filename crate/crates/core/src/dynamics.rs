//! States, inner products and observables in the original and flat frames,
//! plus the Heisenberg and interaction pictures as vielbein choices.

use num_complex::Complex64 as C64;

use crate::error::{HermitizeError, Result};
use crate::flow::{integrate, step, OperatorTrajectory, Scheme, TimeGrid, TrajectoryRole};
use crate::models::{constant_operator, HamiltonianModel, TimeOperator};
use crate::operator::{
    cholesky_upper, compensated_sandwich, eigenvalues, require_hermitian, right_divide, spectrum_distance, OperatorMatrix, StateVector, I,
};
use crate::vielbein::{coevolve_vielbein, DerivativeSource, GaugeLabel, VielbeinFrame, INDUCED_HERMITICITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFrame {
    Original,
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    grid: TimeGrid,
    samples: Vec<StateVector>,
    frame: StateFrame,
}

impl StateTrajectory {
    pub fn new(grid: TimeGrid, samples: Vec<StateVector>, frame: StateFrame) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(HermitizeError::Shape(format!("{} samples for {} grid nodes", samples.len(), grid.len())));
        }
        let dim = samples[0].len();
        for (k, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(HermitizeError::Shape(format!("sample {k} has dimension {}", s.len())));
            }
            if !s.is_finite() {
                return Err(HermitizeError::NonFinite(format!("state sample {k}")));
            }
        }
        Ok(Self { grid, samples, frame })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[StateVector] {
        &self.samples
    }

    pub fn at(&self, k: usize) -> &StateVector {
        &self.samples[k]
    }

    pub fn frame(&self) -> StateFrame {
        self.frame
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }
}

/// Integrates `∂ₜψ = −iHψ` without renormalizing.
pub fn evolve_state(model: &HamiltonianModel, psi0: StateVector, grid: &TimeGrid) -> Result<StateTrajectory> {
    evolve_state_with(model, psi0, grid, Scheme::Rk4)
}

pub fn evolve_state_with(
    model: &HamiltonianModel,
    psi0: StateVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<StateTrajectory> {
    if psi0.len() != model.dim() {
        return Err(HermitizeError::Shape("initial state does not match the model".into()));
    }
    if !psi0.is_finite() || psi0.norm() == 0.0 {
        return Err(HermitizeError::Precondition("initial state must be finite and nonzero".into()));
    }
    let constant_h = model.is_time_independent().then(|| model.evaluate(grid.t0()).scale(-I));
    let rhs = |t: f64, psi: &StateVector| match &constant_h {
        Some(m) => m.apply(psi),
        None => model.evaluate(t).scale(-I).apply(psi),
    };
    let samples = integrate(rhs, psi0, grid, scheme)?;
    StateTrajectory::new(*grid, samples, StateFrame::Original)
}

/// `ψ♭(t) = E(t)ψ(t)` node by node.
pub fn to_flat(frame: &VielbeinFrame, psi: &StateTrajectory) -> Result<StateTrajectory> {
    if frame.grid() != psi.grid() {
        return Err(HermitizeError::Shape("frame and state trajectories live on different grids".into()));
    }
    if psi.frame() != StateFrame::Original {
        return Err(HermitizeError::Precondition("state trajectory is already flat".into()));
    }
    if frame.dim() != psi.dim() {
        return Err(HermitizeError::Shape("frame and state dimensions differ".into()));
    }
    let samples = psi.samples().iter().enumerate().map(|(k, s)| frame.vielbein(k).apply(s)).collect();
    StateTrajectory::new(*psi.grid(), samples, StateFrame::Flat)
}

/// `⟨φ|G|ψ⟩`, accumulated with compensation: for ill-conditioned metrics
/// the terms cancel by many orders of magnitude.
pub fn inner_product(g: &OperatorMatrix, phi: &StateVector, psi: &StateVector) -> C64 {
    compensated_sandwich(phi, g, psi)
}

/// Residual of `ψ♭(t+h) = RK4 step of −iH♭ψ♭(t)` at every step. Needs the
/// frame's target so that `H♭` is available between nodes.
pub fn flat_step_residuals(frame: &VielbeinFrame, flat: &StateTrajectory) -> Result<Vec<f64>> {
    if flat.frame() != StateFrame::Flat || frame.grid() != flat.grid() {
        return Err(HermitizeError::Precondition("expected the flat image of a state on the frame grid".into()));
    }
    let target = frame
        .target()
        .ok_or_else(|| HermitizeError::Precondition("frame has no target flat Hamiltonian".into()))?;
    let rhs = |t: f64, psi: &StateVector| target(t).scale(-I).apply(psi);
    let grid = flat.grid();
    Ok((0..grid.steps())
        .map(|k| {
            let t = grid.node(k);
            let h = grid.node(k + 1) - t;
            step(&rhs, Scheme::Rk4, t, flat.at(k), h).distance(flat.at(k + 1))
        })
        .collect())
}

/// Default relative tolerance for `‖O†G − GO‖∞ ≤ tol·‖G‖∞·‖O‖∞`.
pub const SELF_ADJOINT_TOL: f64 = 1e-8;
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: OperatorMatrix,
    self_adjoint_wrt: Option<OperatorMatrix>,
}

/// `‖O†G − GO‖∞ / (‖G‖∞‖O‖∞)`.
pub fn self_adjointness_residual(o: &OperatorMatrix, g: &OperatorMatrix) -> f64 {
    let scale = g.max_norm() * o.max_norm();
    if scale == 0.0 {
        return 0.0;
    }
    o.adjoint().matmul(g).distance(&g.matmul(o)) / scale
}

impl Observable {
    pub fn new(matrix: OperatorMatrix) -> Self {
        Self { matrix, self_adjoint_wrt: None }
    }

    /// Observable flagged self-adjoint with respect to `g`; fails if it is not.
    pub fn self_adjoint(matrix: OperatorMatrix, g: &OperatorMatrix) -> Result<Self> {
        if matrix.dim() != g.dim() {
            return Err(HermitizeError::Shape("observable and metric dimensions differ".into()));
        }
        let residual = self_adjointness_residual(&matrix, g);
        if residual > SELF_ADJOINT_TOL {
            return Err(HermitizeError::Precondition(format!(
                "observable is not self-adjoint with respect to the metric (relative residual {residual:.3e})"
            )));
        }
        Ok(Self { matrix, self_adjoint_wrt: Some(g.clone()) })
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn metric(&self) -> Option<&OperatorMatrix> {
        self.self_adjoint_wrt.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Geometry an expectation value is taken in.
#[derive(Debug, Clone, Copy)]
pub enum Geometry<'a> {
    /// A vielbein `E`; the metric is `E†E`.
    Vielbein(&'a OperatorMatrix),
    /// A metric `G`; the flat route uses its Cholesky factor.
    Metric(&'a OperatorMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    /// `ψ†GOψ`.
    pub value: C64,
    /// `(Eψ)†(EOE⁻¹)(Eψ)`.
    pub flat_value: C64,
    pub route_difference: f64,
}

pub fn expectation(geometry: Geometry<'_>, o: &Observable, psi: &StateVector) -> Result<Expectation> {
    let (e, g) = match geometry {
        Geometry::Vielbein(e) => (e.clone(), e.adjoint().matmul(e)),
        Geometry::Metric(g) => (cholesky_upper(g)?, g.clone()),
    };
    if o.dim() != g.dim() || psi.len() != g.dim() {
        return Err(HermitizeError::Shape("observable, state and geometry must conform".into()));
    }
    let value = inner_product(&g, psi, &o.matrix.apply(psi));
    let flat_psi = e.apply(psi);
    let o_flat = right_divide(&e.matmul(&o.matrix), &e)?;
    let flat_value = flat_psi.dot(&o_flat.apply(&flat_psi));
    let route_difference = (value - flat_value).norm();
    let tol = ROUTE_AGREEMENT_TOL * (1.0 + value.norm());
    if route_difference > tol {
        return Err(HermitizeError::InternalConsistency {
            check: "expectation-routes",
            residual: route_difference,
            tol,
        });
    }
    Ok(Expectation { value, flat_value, route_difference })
}

/// `O♭ = EOE⁻¹` at node `k`, checked Hermitian and isospectral with `O`.
pub fn observable_flat(frame: &VielbeinFrame, o: &Observable, k: usize) -> Result<OperatorMatrix> {
    let e = frame.vielbein(k);
    let g = frame.metric(k);
    let residual = self_adjointness_residual(o.matrix(), &g);
    if residual > SELF_ADJOINT_TOL {
        return Err(HermitizeError::Precondition(format!(
            "observable is not self-adjoint with respect to the frame metric at node {k} (relative residual {residual:.3e})"
        )));
    }
    let o_flat = right_divide(&e.matmul(o.matrix()), e)?;
    let herm = o_flat.hermiticity_residual();
    let tol = INDUCED_HERMITICITY_TOL * (1.0 + o_flat.max_norm());
    if herm > tol {
        return Err(HermitizeError::NotHermitian { residual: herm, tol });
    }
    let spread = spectrum_distance(&eigenvalues(o.matrix()), &eigenvalues(&o_flat.hermitian_part()));
    let tol = SPECTRUM_TOL * (1.0 + o.matrix().max_norm());
    if spread > tol {
        return Err(HermitizeError::InternalConsistency { check: "observable-spectrum", residual: spread, tol });
    }
    Ok(o_flat)
}

/// Vielbein with `E(0) = I` and `H♭ = 0`; for Hermitian `H` this is `U_H†`.
pub fn heisenberg_frame(model: &HamiltonianModel, grid: &TimeGrid) -> Result<VielbeinFrame> {
    let zero = OperatorMatrix::zeros(model.dim());
    coevolve_vielbein(model, constant_operator(zero), OperatorMatrix::identity(model.dim()), grid)
}

const INTERACTION_TOL: f64 = 1e-8;

/// Interaction picture of `H = h_s + h_int`: `E = U_I†` with
/// `∂ₜU_I = −i·h_s·U_I`, `U_I(0) = I`, so that `H♭ = U_I†·h_int·U_I`.
pub fn interaction_frame(h_s: TimeOperator, h_int: TimeOperator, grid: &TimeGrid) -> Result<VielbeinFrame> {
    let dim = h_s(grid.t0()).dim();
    let times = grid.times();
    let mut hs_nodes = Vec::with_capacity(times.len());
    let mut hint_nodes = Vec::with_capacity(times.len());
    for &t in &times {
        let (a, b) = (h_s(t), h_int(t));
        if a.dim() != dim || b.dim() != dim {
            return Err(HermitizeError::Shape("free and interaction parts must share a dimension".into()));
        }
        for (m, what) in [(&a, "free"), (&b, "interaction")] {
            require_hermitian(m, 1e-10 * dim as f64)
                .map_err(|e| HermitizeError::Precondition(format!("{what} Hamiltonian at t = {t}: {e}")))?;
        }
        hs_nodes.push(a);
        hint_nodes.push(b);
    }

    let rhs = |t: f64, u: &OperatorMatrix| h_s(t).matmul(u).scale(-I);
    let us = integrate(rhs, OperatorMatrix::identity(dim), grid, Scheme::Rk4)?;
    let us = OperatorTrajectory::new(*grid, us, TrajectoryRole::Unitary)?;

    let es: Vec<OperatorMatrix> = us.samples().iter().map(OperatorMatrix::adjoint).collect();
    let des: Vec<OperatorMatrix> = es.iter().zip(&hs_nodes).map(|(e, h)| e.matmul(h).scale(I)).collect();
    let totals: Vec<OperatorMatrix> = hs_nodes.iter().zip(&hint_nodes).map(|(a, b)| a + b).collect();
    let frame = VielbeinFrame::from_parts(*grid, es, des, totals, GaugeLabel::Custom, DerivativeSource::Exact, None)?;

    for (k, u) in us.samples().iter().enumerate() {
        let expected = u.adjoint().matmul(&hint_nodes[k]).matmul(u);
        let residual = frame.induced(k).distance(&expected);
        let tol = INTERACTION_TOL * (1.0 + expected.max_norm());
        if residual > tol {
            return Err(HermitizeError::InternalConsistency { check: "interaction-picture", residual, tol });
        }
    }
    Ok(frame)
}
