//! The model → metric → vielbein → dynamics pipeline behind `run`.

use hermitize_core::dynamics::{evolve_state, expectation, inner_product, to_flat, Geometry, Observable};
use hermitize_core::flow::TimeGrid;
use hermitize_core::metric::{evolve_metric_with, MetricSettings};
use hermitize_core::models::{
    classify_bosonic_regime, classify_regime, constant_model, constant_operator, time_operator, two_level_loss,
    two_mode_bosonic, HamiltonianModel, TimeOperator, TwoLevelLossParams, TwoModeBosonicParams,
};
use hermitize_core::operator::{cholesky_upper_with, compensated_dot};
use hermitize_core::oracles::{
    bosonic_metric_closed_form, bosonic_vielbein_closed_form, metric_closed_form, oracle_flat_hamiltonian,
    vielbein_closed_form, OracleParams,
};
use hermitize_core::vielbein::{coevolve_vielbein, factor_metric_pointwise, PointwiseGauge, VielbeinFrame};
use hermitize_core::{HermitizeError, OperatorMatrix, StateVector, StructuralTolerance};
use serde::Serialize;

use crate::config::{to_matrix, to_state, GaugeSpec, MetricSeed, ModelSpec, ScenarioConfig};
use crate::report::DiagnosticRecord;
use crate::CliError;

/// Closed forms available for the catalog models.
#[derive(Debug, Clone)]
enum Oracle {
    TwoLevel(OracleParams),
    Bosonic(TwoModeBosonicParams),
}

impl Oracle {
    fn metric(&self, t: f64) -> hermitize_core::Result<OperatorMatrix> {
        match self {
            Oracle::TwoLevel(p) => metric_closed_form(p, t),
            Oracle::Bosonic(p) => bosonic_metric_closed_form(p, t),
        }
    }

    fn vielbein(&self, t: f64) -> hermitize_core::Result<OperatorMatrix> {
        match self {
            Oracle::TwoLevel(p) => vielbein_closed_form(p, t),
            Oracle::Bosonic(p) => bosonic_vielbein_closed_form(p, t),
        }
    }

    /// Induced Hamiltonian of the closed-form vielbein.
    fn flat(&self, dim: usize) -> OperatorMatrix {
        match self {
            Oracle::TwoLevel(p) => oracle_flat_hamiltonian(p),
            Oracle::Bosonic(_) => OperatorMatrix::zeros(dim),
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub regime: String,
    pub records: Vec<DiagnosticRecord>,
    /// `[re, im]` of `⟨ψ|G·O|ψ⟩` per observable, per node.
    pub expectations: Vec<Vec<[f64; 2]>>,
}

impl RunOutput {
    pub fn max_herm_residual(&self) -> f64 {
        self.records.iter().map(|r| r.herm_residual_hflat).fold(0.0, f64::max)
    }

    /// `max |⟨ψ|G|ψ⟩(t) − ⟨ψ|G|ψ⟩(t0)| / |⟨ψ|G|ψ⟩(t0)|`.
    pub fn max_norm_drift(&self) -> f64 {
        let first = self.records[0].inner_product_re;
        self.records
            .iter()
            .map(|r| (r.inner_product_re - first).hypot(r.inner_product_im) / first.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_oracle_deviation(&self) -> Option<f64> {
        self.records.iter().map(|r| r.oracle_deviation).try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
    }
}

struct Setup {
    model: HamiltonianModel,
    oracle: Option<Oracle>,
    regime: String,
}

fn build_model(config: &ScenarioConfig) -> Result<Setup, CliError> {
    Ok(match &config.model {
        ModelSpec::TwoLevelLoss { omega, gamma } => {
            let params = TwoLevelLossParams::new(*omega, *gamma)?;
            let tol = config.ep_tol.unwrap_or_else(|| params.default_ep_tol());
            let oracle = OracleParams::new(*omega, *gamma)?.with_ep_tol(tol);
            Setup {
                model: two_level_loss(params)?,
                regime: classify_regime(&params, tol).to_string(),
                oracle: Some(Oracle::TwoLevel(oracle)),
            }
        }
        ModelSpec::TwoModeBosonic { gamma_a, gamma_b, g, n_max } => {
            let params = TwoModeBosonicParams::new(*gamma_a, *gamma_b, *g, *n_max)?;
            let tol = config.ep_tol.unwrap_or_else(|| params.default_ep_tol());
            Setup {
                model: two_mode_bosonic(params)?,
                regime: classify_bosonic_regime(&params, tol).to_string(),
                // The closed forms need a nonzero coupling.
                oracle: (*g != 0.0).then_some(Oracle::Bosonic(params)),
            }
        }
        ModelSpec::Custom { matrix } => Setup {
            model: constant_model(to_matrix(matrix, "model.matrix")?, "custom")?,
            oracle: None,
            regime: "n/a".into(),
        },
    })
}

fn target_operator(gauge: &GaugeSpec, model: &HamiltonianModel) -> Result<Option<TimeOperator>, CliError> {
    let dim = model.dim();
    Ok(match gauge {
        GaugeSpec::Zero {} => Some(constant_operator(OperatorMatrix::zeros(dim))),
        GaugeSpec::ModelHermitianPart {} => {
            let model = model.clone();
            Some(time_operator(move |t| model.evaluate(t).hermitian_part()))
        }
        GaugeSpec::Custom { matrix } => {
            let m = to_matrix(matrix, "gauge.matrix")?;
            if m.dim() != dim {
                return Err(CliError::Config(format!("gauge.matrix must be {dim}x{dim}")));
            }
            Some(constant_operator(m))
        }
        GaugeSpec::PointwiseCholesky {} | GaugeSpec::PointwiseSqrt {} => None,
    })
}

/// Whether the requested target is the closed-form vielbein's own `H♭`, so
/// that the co-evolved frame can be compared with it directly.
fn target_matches_oracle(gauge: &GaugeSpec, flat: &OperatorMatrix) -> bool {
    match gauge {
        GaugeSpec::Zero {} => flat.max_norm() == 0.0,
        GaugeSpec::Custom { matrix } => {
            to_matrix(matrix, "gauge.matrix").is_ok_and(|m| m.dim() == flat.dim() && m.distance(flat) == 0.0)
        }
        _ => false,
    }
}

fn relative_distance(a: &OperatorMatrix, exact: &OperatorMatrix) -> f64 {
    a.distance(exact) / exact.max_norm().max(1.0)
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, CliError> {
    let Setup { model, oracle, regime } = build_model(config)?;
    let dim = model.dim();
    let grid = TimeGrid::new(config.grid.t0, config.grid.t1, config.grid.steps)?;
    let tolerance = config.structural_tolerance()?;
    let tol = tolerance.unwrap_or_else(|| StructuralTolerance::for_dim(dim));

    let g0 = match &config.metric_seed {
        MetricSeed::Identity => OperatorMatrix::identity(dim),
        MetricSeed::Oracle => match &oracle {
            Some(o) => o.metric(grid.t0())?,
            None => return Err(CliError::Config("metric_seed `oracle`: no closed form for this model".into())),
        },
        MetricSeed::Matrix(m) => {
            let m = to_matrix(m, "metric_seed.matrix")?;
            if m.dim() != dim {
                return Err(CliError::Config(format!("metric_seed.matrix must be {dim}x{dim}")));
            }
            m
        }
    };
    let settings = MetricSettings { tolerance, ..MetricSettings::default() };
    let metric = evolve_metric_with(&model, g0.clone(), &grid, &settings)?;

    let use_oracle_e0 = config.metric_seed == MetricSeed::Oracle && oracle.is_some();
    let frame: VielbeinFrame = match target_operator(&config.gauge, &model)? {
        Some(target) => {
            let e0 = match (&oracle, use_oracle_e0) {
                (Some(o), true) => o.vielbein(grid.t0())?,
                _ => cholesky_upper_with(&g0, &tol)?,
            };
            coevolve_vielbein(&model, target, e0, &grid)?
        }
        None => {
            let gauge = match config.gauge {
                GaugeSpec::PointwiseCholesky {} => PointwiseGauge::Cholesky,
                _ => PointwiseGauge::HermitianSqrt,
            };
            factor_metric_pointwise(&metric, &model, gauge)?
        }
    };
    let compare_vielbein =
        use_oracle_e0 && oracle.as_ref().is_some_and(|o| target_matches_oracle(&config.gauge, &o.flat(dim)));
    let compare_metric = config.metric_seed == MetricSeed::Oracle;

    let psi0 = match &config.initial_state {
        Some(s) => to_state(s)?,
        None => StateVector::basis(dim, 0),
    };
    let psi = evolve_state(&model, psi0, &grid)?;
    let flat = to_flat(&frame, &psi)?;

    let observables = config
        .observables
        .iter()
        .enumerate()
        .map(|(i, m)| Ok(Observable::self_adjoint(to_matrix(m, &format!("observables[{i}]"))?, &g0)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut expectations = vec![Vec::with_capacity(grid.len()); observables.len()];

    let mut records = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let t = grid.node(k);
        let g = metric.at(k);
        let oracle_deviation = match &oracle {
            Some(o) if compare_metric => {
                let mut d = relative_distance(g, &o.metric(t)?);
                if compare_vielbein {
                    d = d.max(relative_distance(frame.vielbein(k), &o.vielbein(t)?));
                }
                Some(d)
            }
            _ => None,
        };
        let ip = inner_product(g, psi.at(k), psi.at(k));
        let record = DiagnosticRecord {
            t,
            herm_residual_hflat: frame.herm_residual_history()[k],
            min_eig_g: metric.min_eig_history()[k],
            cond_g: metric.condition_history()[k],
            metric_consistency: frame.metric(k).distance(g),
            inner_product_re: ip.re,
            inner_product_im: ip.im,
            oracle_deviation,
            flat_norm: compensated_dot(flat.at(k), flat.at(k)).re,
        };
        if let Some(field) = record.non_finite_field() {
            return Err(HermitizeError::NonFinite(format!("diagnostic `{field}` at t = {t}")).into());
        }
        records.push(record);
        for (o, out) in observables.iter().zip(expectations.iter_mut()) {
            let v = expectation(Geometry::Vielbein(frame.vielbein(k)), o, psi.at(k))?.value;
            out.push([v.re, v.im]);
        }
    }
    Ok(RunOutput { regime, records, expectations })
}
