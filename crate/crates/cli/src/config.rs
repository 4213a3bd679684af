//! Scenario configuration: one JSON document, with `--set dotted.key=value`
//! overrides applied to the raw JSON before it is validated.

use std::path::{Path, PathBuf};

use hermitize_core::{OperatorMatrix, StateVector, StructuralTolerance, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// A matrix entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Row-major square matrix.
pub type MatrixSpec = Vec<Vec<Entry>>;

pub fn to_matrix(spec: &MatrixSpec, what: &str) -> Result<OperatorMatrix, CliError> {
    let rows: Vec<Vec<C64>> = spec.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect();
    OperatorMatrix::from_rows(&rows).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

pub fn to_state(spec: &[Entry]) -> Result<StateVector, CliError> {
    StateVector::new(spec.iter().map(|e| e.value()).collect())
        .map_err(|e| CliError::Config(format!("initial_state: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    TwoLevelLoss { omega: f64, gamma: f64 },
    TwoModeBosonic { gamma_a: f64, gamma_b: f64, g: f64, n_max: usize },
    /// Constant user-supplied Hamiltonian.
    Custom { matrix: MatrixSpec },
}

impl ModelSpec {
    /// Numeric parameters a sweep may vary.
    pub fn numeric_keys(&self) -> &'static [&'static str] {
        match self {
            ModelSpec::TwoLevelLoss { .. } => &["omega", "gamma"],
            ModelSpec::TwoModeBosonic { .. } => &["gamma_a", "gamma_b", "g", "n_max"],
            ModelSpec::Custom { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

/// Choice of the flat Hamiltonian the vielbein is steered to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    Zero {},
    ModelHermitianPart {},
    Custom {
        matrix: MatrixSpec,
    },
    PointwiseCholesky {},
    PointwiseSqrt {},
}

impl Default for GaugeSpec {
    fn default() -> Self {
        GaugeSpec::Zero {}
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSeed {
    #[default]
    Identity,
    /// The closed-form metric at `t0` (catalog models only).
    Oracle,
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub positivity: f64,
    pub unitarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub gauge: GaugeSpec,
    /// Defaults to the first basis vector.
    #[serde(default)]
    pub initial_state: Option<Vec<Entry>>,
    #[serde(default)]
    pub metric_seed: MetricSeed,
    #[serde(default)]
    pub observables: Vec<MatrixSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub ep_tol: Option<f64>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl ScenarioConfig {
    pub fn structural_tolerance(&self) -> Result<Option<StructuralTolerance>, CliError> {
        self.tolerances
            .map(|t| StructuralTolerance::new(t.hermiticity, t.positivity, t.unitarity))
            .transpose()
            .map_err(|e| CliError::Config(format!("tolerances: {e}")))
    }
}

/// Configuration used when no file is given.
pub fn default_config() -> Value {
    serde_json::json!({
        "model": { "name": "two_level_loss", "omega": 1.0, "gamma": 1.0 },
        "grid": { "t0": 0.0, "t1": 5.0, "steps": 5000 },
        "gauge": { "kind": "zero" },
        "metric_seed": "oracle"
    })
}

pub fn read_config(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))
}

/// Applies `key.path=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise; missing intermediate objects are created.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key `{key}` has an empty segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{part}` is not inside an object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override `{key}` does not address an object field")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

pub fn parse_config(doc: Value) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &ScenarioConfig) -> Result<(), CliError> {
    let finite = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(CliError::Config(format!("{name} must be finite")))
        }
    };
    match &config.model {
        ModelSpec::TwoLevelLoss { omega, gamma } => {
            finite("model.omega", *omega)?;
            finite("model.gamma", *gamma)?;
        }
        ModelSpec::TwoModeBosonic { gamma_a, gamma_b, g, .. } => {
            finite("model.gamma_a", *gamma_a)?;
            finite("model.gamma_b", *gamma_b)?;
            finite("model.g", *g)?;
        }
        ModelSpec::Custom { .. } => {
            if config.metric_seed == MetricSeed::Oracle {
                return Err(CliError::Config("metric_seed `oracle` needs a catalog model".into()));
            }
        }
    }
    finite("grid.t0", config.grid.t0)?;
    finite("grid.t1", config.grid.t1)?;
    if let Some(tol) = config.ep_tol {
        if !(tol >= 0.0) {
            return Err(CliError::Config("ep_tol must be non-negative".into()));
        }
    }
    Ok(())
}

/// Loads the file (or the default), applies overrides, and validates.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<(ScenarioConfig, Value), CliError> {
    let mut doc = match path {
        Some(p) => read_config(p)?,
        None => default_config(),
    };
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    Ok((parse_config(doc.clone())?, doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parses() {
        let c = parse_config(default_config()).unwrap();
        assert_eq!(c.model, ModelSpec::TwoLevelLoss { omega: 1.0, gamma: 1.0 });
        assert_eq!(c.metric_seed, MetricSeed::Oracle);
        assert_eq!(c.format, OutputFormat::Csv);
    }

    #[test]
    fn missing_gamma_is_named() {
        let mut doc = default_config();
        doc["model"].as_object_mut().unwrap().remove("gamma");
        let err = parse_config(doc).unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for (path, value) in [("colour", "1"), ("model.delta", "2"), ("grid.dt", "0.1"), ("gauge.strength", "1")] {
            let mut doc = default_config();
            apply_override(&mut doc, &format!("{path}={value}")).unwrap();
            let err = parse_config(doc).unwrap_err().to_string();
            assert!(err.contains("unknown"), "{path}: {err}");
        }
    }

    #[test]
    fn overrides_parse_json_then_fall_back_to_strings() {
        let mut doc = default_config();
        apply_override(&mut doc, "model.gamma=2.5").unwrap();
        apply_override(&mut doc, "gauge.kind=pointwise_sqrt").unwrap();
        apply_override(&mut doc, "metric_seed={\"matrix\": [[2, 0], [0, [1, 0]]]}").unwrap();
        let c = parse_config(doc).unwrap();
        assert_eq!(c.model, ModelSpec::TwoLevelLoss { omega: 1.0, gamma: 2.5 });
        assert_eq!(c.gauge, GaugeSpec::PointwiseSqrt {});
        let MetricSeed::Matrix(m) = c.metric_seed else { panic!("expected a matrix seed") };
        assert_eq!(to_matrix(&m, "seed").unwrap(), OperatorMatrix::real_diagonal(&[2.0, 1.0]));
        assert!(apply_override(&mut default_config(), "novalue").is_err());
        assert!(apply_override(&mut default_config(), "model..gamma=1").is_err());
        assert!(apply_override(&mut default_config(), "model.gamma.x=1").is_err());
    }

    #[test]
    fn oracle_seed_needs_catalog_model() {
        let mut doc = default_config();
        apply_override(&mut doc, "model={\"name\": \"custom\", \"matrix\": [[0, 1], [1, 0]]}").unwrap();
        assert!(parse_config(doc.clone()).is_err());
        apply_override(&mut doc, "metric_seed=identity").unwrap();
        assert!(parse_config(doc).is_ok());
    }
}
