//! Vielbein frames `G = E†E`, the induced Hamiltonian
//! `H♭ = EHE⁻¹ + i(∂ₜE)E⁻¹`, and gauge transformations `E → UE`.

mod gauge;

use std::fmt;

pub use gauge::{apply_gauge, gauge_flow, gauge_flow_with, retarget_gauge, GaugeGenerator, GAUGE_AGREEMENT_TOL};

use crate::error::{HermitizeError, Result};
use crate::flow::{integrate_with, OperatorTrajectory, Scheme, TimeGrid, TrajectoryRole};
use crate::metric::MetricTrajectory;
use crate::models::{HamiltonianModel, TimeOperator};
use crate::operator::{
    cholesky_upper, condition_number, hermitian_sqrt, require_hermitian, right_divide, OperatorMatrix,
    StructuralTolerance, I, SINGULARITY_THRESHOLD,
};

/// Relative tolerance for the Hermiticity of induced Hamiltonians.
pub const INDUCED_HERMITICITY_TOL: f64 = 1e-8;

/// Tolerance for a co-evolved frame reproducing its target.
pub const TARGET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaugeLabel {
    Cholesky,
    HermitianSqrt,
    TargetFlat,
    Custom,
}

impl fmt::Display for GaugeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaugeLabel::Cholesky => "cholesky",
            GaugeLabel::HermitianSqrt => "hermitian-sqrt",
            GaugeLabel::TargetFlat => "target-flat",
            GaugeLabel::Custom => "custom",
        })
    }
}

/// Where a frame's `∂ₜE` came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeSource {
    /// From the defining ODE or a closed form.
    Exact,
    /// Fourth-order finite differences of sampled factors. The estimate is
    /// the observed `h` versus `2h` discrepancy in `H♭`, NaN if the grid is
    /// too short to form it.
    FiniteDifference { error_estimate: f64 },
}

/// Pointwise canonical factorizations of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointwiseGauge {
    Cholesky,
    HermitianSqrt,
}

#[derive(Clone)]
pub struct VielbeinFrame {
    traj: OperatorTrajectory,
    derivatives: Vec<OperatorMatrix>,
    hamiltonians: Vec<OperatorMatrix>,
    induced: Vec<OperatorMatrix>,
    herm_residual: Vec<f64>,
    condition: Vec<f64>,
    gauge: GaugeLabel,
    source: DerivativeSource,
    target: Option<TimeOperator>,
}

impl fmt::Debug for VielbeinFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VielbeinFrame")
            .field("grid", self.traj.grid())
            .field("dim", &self.traj.dim())
            .field("gauge", &self.gauge)
            .field("source", &self.source)
            .field("has_target", &self.target.is_some())
            .finish_non_exhaustive()
    }
}

/// `EHE⁻¹ + i·dE·E⁻¹`, evaluated as `(EH + i·dE)E⁻¹` by a linear solve.
pub fn induced_hamiltonian(e: &OperatorMatrix, de: &OperatorMatrix, h: &OperatorMatrix) -> Result<OperatorMatrix> {
    if e.dim() != de.dim() || e.dim() != h.dim() {
        return Err(HermitizeError::Shape("vielbein, derivative and Hamiltonian must conform".into()));
    }
    right_divide(&e.matmul(h).add_scaled(1.0, &de.scale(I)), e)
}

/// `∂ₜE = −i·T·E + i·E·H`.
pub fn coevolution_rhs(e: &OperatorMatrix, target: &OperatorMatrix, h: &OperatorMatrix) -> OperatorMatrix {
    (&e.matmul(h) - &target.matmul(e)).scale(I)
}

impl VielbeinFrame {
    /// Assembles a frame from node samples of `E`, `∂ₜE` and `H`, computing
    /// and checking the induced Hamiltonian at every node.
    pub fn from_parts(
        grid: TimeGrid,
        vielbeins: Vec<OperatorMatrix>,
        derivatives: Vec<OperatorMatrix>,
        hamiltonians: Vec<OperatorMatrix>,
        gauge: GaugeLabel,
        source: DerivativeSource,
        target: Option<TimeOperator>,
    ) -> Result<Self> {
        if derivatives.len() != vielbeins.len() || hamiltonians.len() != vielbeins.len() {
            return Err(HermitizeError::Shape("per-node sample counts differ".into()));
        }
        let traj = OperatorTrajectory::new(grid, vielbeins, TrajectoryRole::Vielbein)?;
        let mut induced = Vec::with_capacity(grid.len());
        let mut herm_residual = Vec::with_capacity(grid.len());
        let mut condition = Vec::with_capacity(grid.len());
        for (k, e) in traj.samples().iter().enumerate() {
            let t = grid.node(k);
            let cond = condition_number(e);
            if !(cond <= SINGULARITY_THRESHOLD) {
                return Err(HermitizeError::VielbeinSingular { time: t, condition: cond });
            }
            let hf = induced_hamiltonian(e, &derivatives[k], &hamiltonians[k])
                .map_err(|_| HermitizeError::VielbeinSingular { time: t, condition: cond })?;
            let residual = hf.hermiticity_residual();
            if source == DerivativeSource::Exact {
                let tol = INDUCED_HERMITICITY_TOL * (1.0 + hf.max_norm());
                if residual > tol {
                    return Err(HermitizeError::NotHermitian { residual, tol });
                }
            }
            induced.push(hf);
            herm_residual.push(residual);
            condition.push(cond);
        }
        Ok(Self { traj, derivatives, hamiltonians, induced, herm_residual, condition, gauge, source, target })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.traj.grid()
    }

    pub fn dim(&self) -> usize {
        self.traj.dim()
    }

    pub fn trajectory(&self) -> &OperatorTrajectory {
        &self.traj
    }

    pub fn vielbein(&self, k: usize) -> &OperatorMatrix {
        self.traj.at(k)
    }

    pub fn vielbeins(&self) -> &[OperatorMatrix] {
        self.traj.samples()
    }

    pub fn derivative(&self, k: usize) -> &OperatorMatrix {
        &self.derivatives[k]
    }

    pub fn hamiltonian(&self, k: usize) -> &OperatorMatrix {
        &self.hamiltonians[k]
    }

    pub fn induced(&self, k: usize) -> &OperatorMatrix {
        &self.induced[k]
    }

    pub fn induced_history(&self) -> &[OperatorMatrix] {
        &self.induced
    }

    /// `‖H♭ − H♭†‖∞` per node.
    pub fn herm_residual_history(&self) -> &[f64] {
        &self.herm_residual
    }

    /// One-norm condition estimate of `E` per node.
    pub fn condition_history(&self) -> &[f64] {
        &self.condition
    }

    pub fn gauge(&self) -> GaugeLabel {
        self.gauge
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        self.source
    }

    /// True for frames whose `H♭` is only accurate to the grid.
    pub fn is_pointwise(&self) -> bool {
        matches!(self.source, DerivativeSource::FiniteDifference { .. })
    }

    /// The flat-frame generator this frame was built for, if known as a
    /// function of time.
    pub fn target(&self) -> Option<&TimeOperator> {
        self.target.as_ref()
    }

    /// The metric `E†E` at node `k`.
    pub fn metric(&self, k: usize) -> OperatorMatrix {
        let e = self.vielbein(k);
        e.adjoint().matmul(e)
    }

    /// Max over nodes of `‖E†E − G‖∞ / ‖G‖∞`.
    pub fn metric_consistency(&self, g: &MetricTrajectory) -> Result<f64> {
        if g.grid() != self.grid() {
            return Err(HermitizeError::Shape("metric and frame grids differ".into()));
        }
        Ok((0..self.grid().len())
            .map(|k| self.metric(k).distance(g.at(k)) / g.at(k).max_norm())
            .fold(0.0, f64::max))
    }
}

fn hamiltonian_samples(model: &HamiltonianModel, grid: &TimeGrid) -> Vec<OperatorMatrix> {
    if model.is_time_independent() {
        vec![model.evaluate(grid.t0()); grid.len()]
    } else {
        grid.times().into_iter().map(|t| model.evaluate(t)).collect()
    }
}

fn check_target_hermitian(target: &OperatorMatrix, dim: usize, t: f64) -> Result<()> {
    if target.dim() != dim {
        return Err(HermitizeError::Shape(format!("target at t = {t} has the wrong dimension")));
    }
    require_hermitian(target, StructuralTolerance::for_dim(dim).hermiticity_tol)
        .map_err(|e| HermitizeError::Precondition(format!("target flat Hamiltonian at t = {t}: {e}")))
}

/// Integrates `∂ₜE = −i·T(t)·E + i·E·H(t)` from `E0` so that the induced
/// Hamiltonian equals the Hermitian target `T`.
pub fn coevolve_vielbein(
    model: &HamiltonianModel,
    target: TimeOperator,
    e0: OperatorMatrix,
    grid: &TimeGrid,
) -> Result<VielbeinFrame> {
    coevolve_vielbein_with(model, target, e0, grid, Scheme::Rk4)
}

pub fn coevolve_vielbein_with(
    model: &HamiltonianModel,
    target: TimeOperator,
    e0: OperatorMatrix,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<VielbeinFrame> {
    let dim = model.dim();
    if e0.dim() != dim {
        return Err(HermitizeError::Shape("initial vielbein does not match the model".into()));
    }
    let cond = condition_number(&e0);
    if !(cond <= SINGULARITY_THRESHOLD) {
        return Err(HermitizeError::VielbeinSingular { time: grid.t0(), condition: cond });
    }
    let hs = hamiltonian_samples(model, grid);
    let targets: Vec<OperatorMatrix> = grid.times().into_iter().map(|t| target(t)).collect();
    for (k, tk) in targets.iter().enumerate() {
        check_target_hermitian(tk, dim, grid.node(k))?;
    }

    let constant_h = model.is_time_independent().then(|| hs[0].clone());
    let rhs = |t: f64, e: &OperatorMatrix| {
        let h = constant_h.clone().unwrap_or_else(|| model.evaluate(t));
        coevolution_rhs(e, &target(t), &h)
    };
    let es = integrate_with(rhs, e0, grid, scheme, |_, _, e| Ok(e))?;
    let des: Vec<OperatorMatrix> = (0..grid.len()).map(|k| coevolution_rhs(&es[k], &targets[k], &hs[k])).collect();

    let frame = VielbeinFrame::from_parts(
        *grid,
        es,
        des,
        hs,
        GaugeLabel::TargetFlat,
        DerivativeSource::Exact,
        Some(target.clone()),
    )?;
    for (k, tk) in targets.iter().enumerate() {
        let residual = frame.induced(k).distance(tk);
        let tol = TARGET_TOL * (1.0 + tk.max_norm());
        if residual > tol {
            return Err(HermitizeError::InternalConsistency { check: "induced-target", residual, tol });
        }
    }
    Ok(frame)
}

/// Frame from exactly known `E(t)` and `∂ₜE(t)`, for example closed forms.
pub fn frame_from_closed_form(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    vielbein: impl Fn(f64) -> Result<OperatorMatrix>,
    derivative: impl Fn(f64) -> Result<OperatorMatrix>,
    target: Option<TimeOperator>,
) -> Result<VielbeinFrame> {
    let times = grid.times();
    let es = times.iter().map(|&t| vielbein(t)).collect::<Result<Vec<_>>>()?;
    let des = times.iter().map(|&t| derivative(t)).collect::<Result<Vec<_>>>()?;
    let label = if target.is_some() { GaugeLabel::TargetFlat } else { GaugeLabel::Custom };
    VielbeinFrame::from_parts(*grid, es, des, hamiltonian_samples(model, grid), label, DerivativeSource::Exact, target)
}

const FD_MIN_NODES: usize = 5;

/// Fourth-order derivative estimate at node `k` with spacing `stride·h`.
fn fd4(samples: &[OperatorMatrix], k: usize, h: f64, stride: usize) -> Option<OperatorMatrix> {
    let n = samples.len();
    let s = stride;
    let at = |j: isize| samples[(k as isize + j * s as isize) as usize].clone();
    let zero = OperatorMatrix::zeros(samples[0].dim());
    let combine = |coeffs: &[(isize, f64)]| {
        coeffs.iter().fold(zero.clone(), |acc, &(j, c)| acc.add_scaled(c, &at(j))).scale_real(1.0 / (12.0 * h * s as f64))
    };
    if k >= 2 * s && k + 2 * s < n {
        Some(combine(&[(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)]))
    } else if stride > 1 {
        None
    } else if k + 4 < n && k < 2 {
        Some(combine(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)]))
    } else if k >= 4 {
        Some(combine(&[(0, 25.0), (-1, -48.0), (-2, 36.0), (-3, -16.0), (-4, 3.0)]))
    } else {
        None
    }
}

/// Factors every node of a metric trajectory independently and estimates
/// `∂ₜE` by fourth-order finite differences. The result is flagged as a
/// pointwise frame: its `H♭` is accurate only to `O(h⁴)`.
pub fn factor_metric_pointwise(
    metric: &MetricTrajectory,
    model: &HamiltonianModel,
    gauge: PointwiseGauge,
) -> Result<VielbeinFrame> {
    let grid = *metric.grid();
    if grid.len() < FD_MIN_NODES {
        return Err(HermitizeError::Precondition(format!(
            "pointwise factoring needs at least {FD_MIN_NODES} nodes for finite differences"
        )));
    }
    let factor = |g: &OperatorMatrix| match gauge {
        PointwiseGauge::Cholesky => cholesky_upper(g),
        PointwiseGauge::HermitianSqrt => hermitian_sqrt(g),
    };
    let es = metric.samples().iter().map(factor).collect::<Result<Vec<_>>>()?;
    let h = grid.step_size();
    let des: Vec<OperatorMatrix> =
        (0..es.len()).map(|k| fd4(&es, k, h, 1).expect("five or more nodes")).collect();
    let hs = hamiltonian_samples(model, &grid);

    let mut error_estimate = f64::NAN;
    for k in 0..es.len() {
        if let Some(coarse) = fd4(&es, k, h, 2) {
            let fine = induced_hamiltonian(&es[k], &des[k], &hs[k])?;
            let rough = induced_hamiltonian(&es[k], &coarse, &hs[k])?;
            let diff = fine.distance(&rough) / 15.0;
            error_estimate = if error_estimate.is_nan() { diff } else { error_estimate.max(diff) };
        }
    }
    let label = match gauge {
        PointwiseGauge::Cholesky => GaugeLabel::Cholesky,
        PointwiseGauge::HermitianSqrt => GaugeLabel::HermitianSqrt,
    };
    VielbeinFrame::from_parts(grid, es, des, hs, label, DerivativeSource::FiniteDifference { error_estimate }, None)
}
