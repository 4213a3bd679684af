//! The metric flow `∂ₜG = i(GH − H†G)` with Hermitian projection and
//! positivity surveillance.

use crate::error::{HermitizeError, Result};
use crate::flow::{integrate, integrate_with, OperatorTrajectory, Scheme, TimeGrid, TrajectoryRole};
use crate::models::HamiltonianModel;
use crate::operator::{
    eigh, hermitian_sqrt, inverse_hermitian_sqrt, require_hermitian, OperatorMatrix, StructuralTolerance, I,
};

/// `i(GH − H†G)`.
pub fn metric_rhs(g: &OperatorMatrix, h: &OperatorMatrix) -> OperatorMatrix {
    (&g.matmul(h) - &h.adjoint().matmul(g)).scale(I)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSettings {
    pub scheme: Scheme,
    /// Replace `G` by `(G + G†)/2` after every step.
    pub project: bool,
    /// Overrides the per-dimension defaults when set.
    pub tolerance: Option<StructuralTolerance>,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self { scheme: Scheme::Rk4, project: true, tolerance: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTrajectory {
    traj: OperatorTrajectory,
    min_eig: Vec<f64>,
    herm_residual: Vec<f64>,
    condition: Vec<f64>,
}

impl MetricTrajectory {
    pub fn trajectory(&self) -> &OperatorTrajectory {
        &self.traj
    }

    pub fn grid(&self) -> &TimeGrid {
        self.traj.grid()
    }

    pub fn samples(&self) -> &[OperatorMatrix] {
        self.traj.samples()
    }

    pub fn at(&self, k: usize) -> &OperatorMatrix {
        self.traj.at(k)
    }

    /// Smallest eigenvalue of `G` at each node.
    pub fn min_eig_history(&self) -> &[f64] {
        &self.min_eig
    }

    /// Hermiticity residual of each node before projection.
    pub fn herm_residual_history(&self) -> &[f64] {
        &self.herm_residual
    }

    /// Spectral condition number `λmax/λmin` at each node.
    pub fn condition_history(&self) -> &[f64] {
        &self.condition
    }

    /// Builds a trajectory from externally supplied samples (for example a
    /// closed form), validating Hermiticity and positivity at every node.
    pub fn from_samples(grid: TimeGrid, samples: Vec<OperatorMatrix>) -> Result<Self> {
        let dim = samples.first().map_or(1, OperatorMatrix::dim);
        let tol = StructuralTolerance::for_dim(dim);
        let mut min_eig = Vec::with_capacity(samples.len());
        let mut herm_residual = Vec::with_capacity(samples.len());
        let mut condition = Vec::with_capacity(samples.len());
        for (k, g) in samples.iter().enumerate() {
            let (lo, cond) = check_node(g, &tol, grid.node(k))?;
            herm_residual.push(g.hermiticity_residual());
            min_eig.push(lo);
            condition.push(cond);
        }
        let traj = OperatorTrajectory::new(grid, samples, TrajectoryRole::Metric)?;
        Ok(Self { traj, min_eig, herm_residual, condition })
    }
}

fn check_node(g: &OperatorMatrix, tol: &StructuralTolerance, t: f64) -> Result<(f64, f64)> {
    require_hermitian(g, tol.hermiticity_tol)?;
    let values = eigh(g).values;
    let lo = values[0];
    let hi = *values.last().expect("non-empty spectrum");
    if !(lo > tol.positivity_tol) {
        return Err(HermitizeError::MetricCollapse { time: t, min_eigenvalue: lo });
    }
    Ok((lo, hi / lo))
}

pub fn evolve_metric(model: &HamiltonianModel, g0: OperatorMatrix, grid: &TimeGrid) -> Result<MetricTrajectory> {
    evolve_metric_with(model, g0, grid, &MetricSettings::default())
}

pub fn evolve_metric_with(
    model: &HamiltonianModel,
    g0: OperatorMatrix,
    grid: &TimeGrid,
    settings: &MetricSettings,
) -> Result<MetricTrajectory> {
    if g0.dim() != model.dim() {
        return Err(HermitizeError::Shape(format!(
            "initial metric is {0}x{0} but the model has dimension {1}",
            g0.dim(),
            model.dim()
        )));
    }
    let tol = settings.tolerance.unwrap_or_else(|| StructuralTolerance::for_dim(g0.dim()));
    require_hermitian(&g0, tol.hermiticity_tol)?;
    let lo = eigh(&g0).values[0];
    if !(lo > tol.positivity_tol) {
        return Err(HermitizeError::MetricDegeneracy { pivot: 0, value: lo });
    }

    let constant_h = model.is_time_independent().then(|| model.evaluate(grid.t0()));
    let rhs = |t: f64, g: &OperatorMatrix| match &constant_h {
        Some(h) => metric_rhs(g, h),
        None => metric_rhs(g, &model.evaluate(t)),
    };

    let mut min_eig = Vec::with_capacity(grid.len());
    let mut herm_residual = Vec::with_capacity(grid.len());
    let mut condition = Vec::with_capacity(grid.len());
    let samples = integrate_with(rhs, g0, grid, settings.scheme, |_, t, g| {
        herm_residual.push(g.hermiticity_residual());
        let g = if settings.project { g.hermitian_part() } else { g };
        let (lo, cond) = check_node(&g, &tol, t)?;
        min_eig.push(lo);
        condition.push(cond);
        Ok(g)
    })?;
    let traj = OperatorTrajectory::new(*grid, samples, TrajectoryRole::Metric)?;
    Ok(MetricTrajectory { traj, min_eig, herm_residual, condition })
}

/// Transporter `T(t)` with `∂ₜT = −iHT + iTH` and
/// `T(0) = G1(0)^{-1/2} G2(0)^{1/2}`, so that `T†G1T` solves the metric flow
/// whenever `G1` does and matches `G2` at the initial time.
pub fn metric_transporter(
    g1_initial: &OperatorMatrix,
    g2_initial: &OperatorMatrix,
    model: &HamiltonianModel,
    grid: &TimeGrid,
) -> Result<Vec<OperatorMatrix>> {
    let t0 = inverse_hermitian_sqrt(g1_initial)?.matmul(&hermitian_sqrt(g2_initial)?);
    let rhs = |t: f64, m: &OperatorMatrix| {
        let h = model.evaluate(t);
        (&m.matmul(&h) - &h.matmul(m)).scale(I)
    };
    integrate(rhs, t0, grid, Scheme::Rk4)
}

/// True iff `‖G2(t) − T(t)†G1(t)T(t)‖∞ ≤ tol` at every node.
pub fn metric_gauge_related(
    g1: &MetricTrajectory,
    g2: &MetricTrajectory,
    model: &HamiltonianModel,
    tol: f64,
) -> Result<bool> {
    if g1.grid() != g2.grid() {
        return Err(HermitizeError::Shape("metric trajectories live on different grids".into()));
    }
    let ts = metric_transporter(g1.at(0), g2.at(0), model, g1.grid())?;
    Ok(ts.iter().enumerate().all(|(k, t)| t.adjoint().matmul(g1.at(k)).matmul(t).distance(g2.at(k)) <= tol))
}
