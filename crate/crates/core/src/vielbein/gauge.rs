use super::{induced_hamiltonian, DerivativeSource, GaugeLabel, VielbeinFrame, INDUCED_HERMITICITY_TOL};
use crate::error::{HermitizeError, Result};
use crate::flow::{integrate_with, OperatorTrajectory, Scheme, TimeGrid, TrajectoryRole};
use crate::models::TimeOperator;
use crate::operator::{
    condition_number, require_hermitian, right_divide, unitarity_residual, OperatorMatrix, StructuralTolerance, I,
};

/// Relative agreement required between the two routes to a gauged `H♭`.
pub const GAUGE_AGREEMENT_TOL: f64 = 1e-7;

/// Relative agreement required when retargeting a frame.
const RETARGET_TOL: f64 = 1e-7;

const GENERATOR_SAMPLE_TIMES: [f64; 3] = [0.0, 0.37, 1.0];

/// Generators of the unitary flow `∂ₜU = −i·H_L·U + i·U·H_R`.
#[derive(Clone)]
pub struct GaugeGenerator {
    h_left: TimeOperator,
    h_right: TimeOperator,
    u0: OperatorMatrix,
}

impl std::fmt::Debug for GaugeGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaugeGenerator").field("u0", &self.u0).finish_non_exhaustive()
    }
}

impl GaugeGenerator {
    pub fn new(h_left: TimeOperator, h_right: TimeOperator, u0: OperatorMatrix) -> Result<Self> {
        let dim = u0.dim();
        let tol = StructuralTolerance::for_dim(dim);
        let drift = unitarity_residual(&u0);
        if drift > tol.unitarity_tol {
            return Err(HermitizeError::UnitarityDrift { time: 0.0, drift });
        }
        for t in GENERATOR_SAMPLE_TIMES {
            for (name, gen) in [("left", &h_left), ("right", &h_right)] {
                let m = gen(t);
                if m.dim() != dim {
                    return Err(HermitizeError::Shape(format!("{name} generator has the wrong dimension")));
                }
                require_hermitian(&m, tol.hermiticity_tol)
                    .map_err(|e| HermitizeError::Precondition(format!("{name} generator at t = {t}: {e}")))?;
            }
        }
        Ok(Self { h_left, h_right, u0 })
    }

    pub fn h_left(&self, t: f64) -> OperatorMatrix {
        (self.h_left)(t)
    }

    pub fn h_right(&self, t: f64) -> OperatorMatrix {
        (self.h_right)(t)
    }

    pub fn u0(&self) -> &OperatorMatrix {
        &self.u0
    }

    pub fn dim(&self) -> usize {
        self.u0.dim()
    }

    /// `−i·H_L·U + i·U·H_R`.
    pub fn rhs(&self, t: f64, u: &OperatorMatrix) -> OperatorMatrix {
        (&u.matmul(&self.h_right(t)) - &self.h_left(t).matmul(u)).scale(I)
    }
}

/// Integrates the gauge flow, failing if `U` drifts from unitarity.
pub fn gauge_flow(gen: &GaugeGenerator, grid: &TimeGrid) -> Result<OperatorTrajectory> {
    gauge_flow_with(gen, grid, Scheme::Rk4)
}

pub fn gauge_flow_with(gen: &GaugeGenerator, grid: &TimeGrid, scheme: Scheme) -> Result<OperatorTrajectory> {
    let tol = StructuralTolerance::for_dim(gen.dim()).unitarity_tol;
    let samples = integrate_with(|t, u| gen.rhs(t, u), gen.u0.clone(), grid, scheme, |_, t, u| {
        let drift = unitarity_residual(&u);
        if drift > tol {
            return Err(HermitizeError::UnitarityDrift { time: t, drift });
        }
        Ok(u)
    })?;
    OperatorTrajectory::new(*grid, samples, TrajectoryRole::Unitary)
}

/// Gauges a frame by `E′ = UE`. The new induced Hamiltonian is computed both
/// as `H_L + U(H♭ − H_R)U⁻¹` and directly from `E′`; the routes must agree.
pub fn apply_gauge(frame: &VielbeinFrame, u: &OperatorTrajectory, gen: &GaugeGenerator) -> Result<VielbeinFrame> {
    let grid = *frame.grid();
    if u.grid() != &grid {
        return Err(HermitizeError::Shape("gauge flow and frame use different grids".into()));
    }
    if u.dim() != frame.dim() {
        return Err(HermitizeError::Shape("gauge flow and frame differ in dimension".into()));
    }
    let n = grid.len();
    let mut es = Vec::with_capacity(n);
    let mut des = Vec::with_capacity(n);
    let mut induced = Vec::with_capacity(n);
    let mut herm_residual = Vec::with_capacity(n);
    let mut condition = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.node(k);
        let uk = u.at(k);
        let (hl, hr) = (gen.h_left(t), gen.h_right(t));
        let e = uk.matmul(frame.vielbein(k));
        let du = (&uk.matmul(&hr) - &hl.matmul(uk)).scale(I);
        let de = &du.matmul(frame.vielbein(k)) + &uk.matmul(frame.derivative(k));

        let formula = &hl + &right_divide(&uk.matmul(&(frame.induced(k) - &hr)), uk)?;
        let direct = induced_hamiltonian(&e, &de, frame.hamiltonian(k))?;
        let residual = formula.distance(&direct);
        let tol = GAUGE_AGREEMENT_TOL * (1.0 + formula.max_norm());
        if residual > tol {
            return Err(HermitizeError::InternalConsistency { check: "gauge-covariance", residual, tol });
        }
        let herm = formula.hermiticity_residual();
        if frame.source == DerivativeSource::Exact {
            let tol = INDUCED_HERMITICITY_TOL * (1.0 + formula.max_norm());
            if herm > tol {
                return Err(HermitizeError::NotHermitian { residual: herm, tol });
            }
        }
        condition.push(condition_number(&e));
        es.push(e);
        des.push(de);
        induced.push(formula);
        herm_residual.push(herm);
    }
    Ok(VielbeinFrame {
        traj: OperatorTrajectory::new(grid, es, TrajectoryRole::Vielbein)?,
        derivatives: des,
        hamiltonians: frame.hamiltonians.clone(),
        induced,
        herm_residual,
        condition,
        gauge: GaugeLabel::Custom,
        source: frame.source,
        target: None,
    })
}

/// Moves a frame to a new flat generator by the connecting gauge
/// `∂ₜU = −i·T_new·U + i·U·H♭`, `U(0) = I`.
pub fn retarget_gauge(frame: &VielbeinFrame, new_target: TimeOperator, grid: &TimeGrid) -> Result<VielbeinFrame> {
    if grid != frame.grid() {
        return Err(HermitizeError::Shape("retarget grid differs from the frame grid".into()));
    }
    let current = frame.target().cloned().ok_or_else(|| {
        HermitizeError::Precondition("retargeting needs a frame whose induced Hamiltonian is known in time".into())
    })?;
    let gen = GaugeGenerator::new(new_target.clone(), current, OperatorMatrix::identity(frame.dim()))?;
    let u = gauge_flow(&gen, grid)?;
    let mut gauged = apply_gauge(frame, &u, &gen)?;
    for k in 0..grid.len() {
        let expected = new_target(grid.node(k));
        let residual = gauged.induced(k).distance(&expected);
        let tol = RETARGET_TOL * (1.0 + expected.max_norm());
        if residual > tol {
            return Err(HermitizeError::InternalConsistency { check: "retarget", residual, tol });
        }
    }
    gauged.gauge = GaugeLabel::TargetFlat;
    gauged.target = Some(new_target);
    Ok(gauged)
}
