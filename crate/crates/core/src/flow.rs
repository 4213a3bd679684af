//! Fixed-step integration of linear matrix and vector ODEs on uniform grids.
//!
//! The engine is stateless: every call is a pure function of its inputs, so
//! independent trajectories may be integrated concurrently.

use crate::error::{HermitizeError, Result};
use crate::operator::{OperatorMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(HermitizeError::Parameter(format!("grid needs finite t1 > t0, got [{t0}, {t1}]")));
        }
        if steps == 0 {
            return Err(HermitizeError::Parameter("grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step_size(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Time at node `k`, computed without accumulating rounding.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.step_size()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    /// The same interval with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self { steps: self.steps * factor, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryRole {
    Metric,
    Vielbein,
    Unitary,
    State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTrajectory {
    grid: TimeGrid,
    samples: Vec<OperatorMatrix>,
    role: TrajectoryRole,
}

impl OperatorTrajectory {
    pub fn new(grid: TimeGrid, samples: Vec<OperatorMatrix>, role: TrajectoryRole) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(HermitizeError::Shape(format!(
                "trajectory has {} samples for a grid of {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        let dim = samples[0].dim();
        if samples.iter().any(|s| s.dim() != dim) {
            return Err(HermitizeError::Shape("trajectory samples differ in dimension".into()));
        }
        Ok(Self { grid, samples, role })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[OperatorMatrix] {
        &self.samples
    }

    pub fn role(&self) -> TrajectoryRole {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn at(&self, k: usize) -> &OperatorMatrix {
        &self.samples[k]
    }

    pub fn last(&self) -> &OperatorMatrix {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &OperatorMatrix)> {
        self.samples.iter().enumerate().map(|(k, s)| (self.grid.node(k), s))
    }

    pub fn into_samples(self) -> Vec<OperatorMatrix> {
        self.samples
    }
}

/// One-step method used by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Scheme {
    /// Classical fourth-order Runge–Kutta.
    #[default]
    Rk4,
    /// Forward Euler. First order; only useful as a negative control.
    Euler,
}

/// Linear-space operations the integrator needs.
pub trait OdeState: Clone {
    /// `self + s · other`.
    fn axpy(&self, s: f64, other: &Self) -> Self;
    fn all_finite(&self) -> bool;
}

impl OdeState for OperatorMatrix {
    fn axpy(&self, s: f64, other: &Self) -> Self {
        self.add_scaled(s, other)
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl OdeState for StateVector {
    fn axpy(&self, s: f64, other: &Self) -> Self {
        self.add_scaled(s, other)
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Advances `y` from `t` to `t + h`.
pub fn step<S: OdeState>(rhs: &impl Fn(f64, &S) -> S, scheme: Scheme, t: f64, y: &S, h: f64) -> S {
    match scheme {
        Scheme::Euler => y.axpy(h, &rhs(t, y)),
        Scheme::Rk4 => {
            let k1 = rhs(t, y);
            let k2 = rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k1));
            let k3 = rhs(t + 0.5 * h, &y.axpy(0.5 * h, &k2));
            let k4 = rhs(t + h, &y.axpy(h, &k3));
            let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
            y.axpy(h / 6.0, &incr)
        }
    }
}

/// Integrates `y' = rhs(t, y)` over `grid`, returning every node.
///
/// `after_step(k, t_k, y_k)` runs on each new node and may replace it (for
/// projections) or reject it.
pub fn integrate_with<S: OdeState>(
    rhs: impl Fn(f64, &S) -> S,
    y0: S,
    grid: &TimeGrid,
    scheme: Scheme,
    mut after_step: impl FnMut(usize, f64, S) -> Result<S>,
) -> Result<Vec<S>> {
    if !y0.all_finite() {
        return Err(HermitizeError::NonFinite("initial value".into()));
    }
    let h = grid.step_size();
    let mut out = Vec::with_capacity(grid.len());
    out.push(after_step(0, grid.t0(), y0)?);
    for k in 0..grid.steps() {
        let next = step(&rhs, scheme, grid.node(k), &out[k], h);
        if !next.all_finite() {
            return Err(HermitizeError::Divergence { step: k + 1, time: grid.node(k + 1) });
        }
        out.push(after_step(k + 1, grid.node(k + 1), next)?);
    }
    Ok(out)
}

pub fn integrate<S: OdeState>(rhs: impl Fn(f64, &S) -> S, y0: S, grid: &TimeGrid, scheme: Scheme) -> Result<Vec<S>> {
    integrate_with(rhs, y0, grid, scheme, |_, _, y| Ok(y))
}

/// RK4 trajectory of a matrix ODE.
pub fn integrate_matrix_ode(
    rhs: impl Fn(f64, &OperatorMatrix) -> OperatorMatrix,
    m0: OperatorMatrix,
    grid: &TimeGrid,
    role: TrajectoryRole,
) -> Result<OperatorTrajectory> {
    let samples = integrate(rhs, m0, grid, Scheme::Rk4)?;
    OperatorTrajectory::new(*grid, samples, role)
}

/// Empirical convergence order from runs at `h`, `h/2` and `h/4`:
/// `p = log2(‖y_h − y_{h/2}‖ / ‖y_{h/2} − y_{h/4}‖)`, maximized over the
/// coarse nodes. Returns NaN when the differences vanish (exact flow).
pub fn richardson_order_check(
    rhs: impl Fn(f64, &OperatorMatrix) -> OperatorMatrix,
    m0: OperatorMatrix,
    grid: &TimeGrid,
) -> Result<f64> {
    richardson_order_check_with(rhs, m0, grid, Scheme::Rk4)
}

pub fn richardson_order_check_with(
    rhs: impl Fn(f64, &OperatorMatrix) -> OperatorMatrix,
    m0: OperatorMatrix,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    let coarse = integrate(&rhs, m0.clone(), grid, scheme)?;
    let half = integrate(&rhs, m0.clone(), &grid.refined(2), scheme)?;
    let quarter = integrate(&rhs, m0, &grid.refined(4), scheme)?;
    let mut err_h: f64 = 0.0;
    let mut err_half: f64 = 0.0;
    for k in 0..grid.len() {
        err_h = err_h.max(coarse[k].distance(&half[2 * k]));
        err_half = err_half.max(half[2 * k].distance(&quarter[4 * k]));
    }
    if err_h == 0.0 || err_half == 0.0 {
        return Ok(f64::NAN);
    }
    Ok((err_h / err_half).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{matrix_exponential, pauli, I};
    use num_complex::Complex64 as C64;
    use std::f64::consts::{E, PI};

    #[test]
    fn grid_validation_and_nodes() {
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.node(3), 1.0);
        assert_eq!(g.refined(2).steps(), 6);
    }

    #[test]
    fn zero_rhs_is_constant() {
        let g = TimeGrid::new(0.0, 2.0, 17).unwrap();
        let tr = integrate_matrix_ode(|_, m| OperatorMatrix::zeros(m.dim()), pauli::sigma_x(), &g, TrajectoryRole::State)
            .unwrap();
        assert!(tr.samples().iter().all(|s| *s == pauli::sigma_x()));
    }

    #[test]
    fn exponential_growth() {
        let g = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let tr = integrate_matrix_ode(|_, m| m.clone(), OperatorMatrix::identity(1), &g, TrajectoryRole::State).unwrap();
        assert!((tr.last()[(0, 0)] - C64::new(E, 0.0)).norm() <= 1e-11);
    }

    #[test]
    fn half_period_precession() {
        let g = TimeGrid::new(0.0, PI, 2000).unwrap();
        let gen = pauli::sigma_x().scale(-I);
        let m0 = OperatorMatrix::from_rows(&[vec![C64::new(1.0, 0.5), C64::new(0.0, 0.0)], vec![
            C64::new(0.3, 0.0),
            C64::new(-2.0, 1.0),
        ]])
        .unwrap();
        let tr = integrate_matrix_ode(|_, m| gen.matmul(m), m0.clone(), &g, TrajectoryRole::Unitary).unwrap();
        assert!(tr.last().distance(&m0.scale_real(-1.0)) <= 1e-9);
        let exact = matrix_exponential(&gen.scale_real(PI)).unwrap().matmul(&m0);
        assert!(tr.last().distance(&exact) <= 1e-9);
    }

    #[test]
    fn rk4_order_on_linear_flow() {
        let a = OperatorMatrix::from_rows(&[vec![C64::new(0.1, -1.0), C64::new(0.5, 0.0)], vec![
            C64::new(0.5, 0.0),
            C64::new(-0.2, 0.3),
        ]])
        .unwrap();
        let g = TimeGrid::new(0.0, 2.0, 40).unwrap();
        let p = richardson_order_check(|_, m| a.matmul(m), OperatorMatrix::identity(2), &g).unwrap();
        assert!((3.8..=4.2).contains(&p), "p = {p}");
    }

    #[test]
    fn zero_rhs_order_is_flagged_exact() {
        let g = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let p = richardson_order_check(|_, m| OperatorMatrix::zeros(m.dim()), OperatorMatrix::identity(2), &g).unwrap();
        assert!(p.is_nan());
    }

    #[test]
    fn stiff_scalar_order() {
        // h·|a| = 0.125 sits well inside the RK4 stability region.
        let g = TimeGrid::new(0.0, 1.0, 400).unwrap();
        let p = richardson_order_check(|_, m| m.scale_real(-50.0), OperatorMatrix::identity(1), &g).unwrap();
        assert!((3.5..=4.2).contains(&p), "p = {p}");
    }

    #[test]
    fn euler_is_first_order() {
        let g = TimeGrid::new(0.0, 1.0, 200).unwrap();
        let p = richardson_order_check_with(|_, m| m.scale_real(-1.0), OperatorMatrix::identity(1), &g, Scheme::Euler)
            .unwrap();
        assert!((0.8..=1.2).contains(&p), "p = {p}");
    }

    #[test]
    fn divergence_reports_step() {
        let g = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let err = integrate_matrix_ode(|_, m| m.scale_real(1e200), OperatorMatrix::identity(1), &g, TrajectoryRole::State)
            .unwrap_err();
        assert!(matches!(err, HermitizeError::Divergence { step: 1..=100, .. }), "{err:?}");
    }

    #[test]
    fn integration_is_deterministic() {
        let a = pauli::sigma_y().scale(C64::new(0.3, -0.7));
        let g = TimeGrid::new(0.0, 3.0, 500).unwrap();
        let run = || integrate_matrix_ode(|t, m| a.matmul(m).scale_real(t.cos()), pauli::sigma_z(), &g, TrajectoryRole::State);
        assert_eq!(run().unwrap(), run().unwrap());
    }
}
