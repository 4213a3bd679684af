//! Parameter sweeps: one scenario per value of a model parameter.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{parse_config, OutputFormat};
use crate::report::{emit, number, render};
use crate::scenario::run_scenario;
use crate::CliError;

pub const THREADS_ENV: &str = "HERMITIZE_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub regime: String,
    /// `ok`, or the label of the failure.
    pub status: String,
    #[serde(rename = "max_herm_residual_Hflat")]
    pub max_herm_residual: Option<f64>,
    pub max_norm_drift: Option<f64>,
    pub message: String,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Resolves `gamma` or `model.gamma` to the model key it names.
fn axis_key(base: &Value, axis: &str) -> Result<String, CliError> {
    let key = axis.strip_prefix("model.").unwrap_or(axis);
    let config = parse_config(base.clone())?;
    if config.model.numeric_keys().contains(&key) {
        Ok(key.to_string())
    } else {
        Err(CliError::Config(format!(
            "sweep axis `{axis}` is not a numeric parameter of this model (expected one of {:?})",
            config.model.numeric_keys()
        )))
    }
}

fn axis_value(key: &str, v: f64) -> Result<Value, CliError> {
    if key == "n_max" {
        if v.fract() != 0.0 || v < 0.0 {
            return Err(CliError::Config(format!("n_max must be a non-negative integer, got {v}")));
        }
        return Ok(Value::from(v as u64));
    }
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .ok_or_else(|| CliError::Config(format!("sweep value {v} is not finite")))
}

/// File for element `index`: `dir/stem.index.ext` next to `base`.
pub fn element_path(base: &Path, index: usize) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{index}"),
    };
    base.with_file_name(name)
}

fn run_element(base: &Value, key: &str, index: usize, value: f64) -> SweepRow {
    let result = (|| {
        let mut doc = base.clone();
        let mut model = doc["model"].take();
        model[key] = axis_value(key, value)?;
        doc["model"] = model;
        let config = parse_config(doc)?;
        let out = run_scenario(&config)?;
        if let Some(path) = &config.output {
            emit(&render(&config, &out, config.format), Some(&element_path(path, index)))?;
        }
        Ok::<_, CliError>(out)
    })();
    match result {
        Ok(out) => SweepRow {
            index,
            value,
            regime: out.regime.clone(),
            status: "ok".into(),
            max_herm_residual: Some(out.max_herm_residual()),
            max_norm_drift: Some(out.max_norm_drift()),
            message: String::new(),
        },
        Err(e) => SweepRow {
            index,
            value,
            regime: String::new(),
            status: e.label().into(),
            max_herm_residual: None,
            max_norm_drift: None,
            message: e.to_string(),
        },
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
            Ok(n) => Ok(Some(n)),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every value concurrently. Rows come back in input order; a failing
/// element is recorded in its row and does not stop the others.
pub fn run_sweep(base: &Value, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let key = axis_key(base, axis)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        values.par_iter().enumerate().map(|(i, &v)| run_element(base, &key, i, v)).collect()
    }))
}

pub const SUMMARY_HEADER: &str = "index,value,regime,status,max_herm_residual_Hflat,max_norm_drift,message";

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(number).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.index,
            number(r.value),
            r.regime,
            r.status,
            opt(r.max_herm_residual),
            opt(r.max_norm_drift),
            quote(&r.message)
        ));
    }
    out
}

pub fn render_summary(axis: &str, rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => summary_csv(rows),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&serde_json::json!({ "axis": axis, "rows": rows }))
                .expect("summary serializes");
            text.push('\n');
            text
        }
    }
}
