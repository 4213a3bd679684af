//! Diagnostic records and their CSV / JSON encodings.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::{OutputFormat, ScenarioConfig};
use crate::scenario::RunOutput;
use crate::CliError;

/// One row per grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    /// `‖H♭ − H♭†‖∞`.
    #[serde(rename = "herm_residual_Hflat")]
    pub herm_residual_hflat: f64,
    #[serde(rename = "min_eig_G")]
    pub min_eig_g: f64,
    #[serde(rename = "cond_G")]
    pub cond_g: f64,
    /// `‖E†E − G‖∞`.
    pub metric_consistency: f64,
    /// `⟨ψ|G|ψ⟩`.
    pub inner_product_re: f64,
    pub inner_product_im: f64,
    /// Relative distance to the closed forms, when the scenario has them.
    pub oracle_deviation: Option<f64>,
    /// `‖Eψ‖²`.
    pub flat_norm: f64,
}

pub const CSV_HEADER: &str = "t,herm_residual_Hflat,min_eig_G,cond_G,metric_consistency,\
inner_product_re,inner_product_im,oracle_deviation,flat_norm";

impl DiagnosticRecord {
    fn values(&self) -> [(&'static str, Option<f64>); 9] {
        [
            ("t", Some(self.t)),
            ("herm_residual_Hflat", Some(self.herm_residual_hflat)),
            ("min_eig_G", Some(self.min_eig_g)),
            ("cond_G", Some(self.cond_g)),
            ("metric_consistency", Some(self.metric_consistency)),
            ("inner_product_re", Some(self.inner_product_re)),
            ("inner_product_im", Some(self.inner_product_im)),
            ("oracle_deviation", self.oracle_deviation),
            ("flat_norm", Some(self.flat_norm)),
        ]
    }

    pub fn non_finite_field(&self) -> Option<&'static str> {
        self.values().into_iter().find(|(_, v)| v.is_some_and(|v| !v.is_finite())).map(|(name, _)| name)
    }
}

/// Scientific notation with 18 significant digits, enough to round-trip.
pub fn number(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn records_csv(records: &[DiagnosticRecord]) -> String {
    let mut out = String::with_capacity(256 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let cells: Vec<String> = r.values().iter().map(|(_, v)| v.map(number).unwrap_or_default()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a ScenarioConfig,
    regime: &'a str,
    records: &'a [DiagnosticRecord],
    expectations: &'a [Vec<[f64; 2]>],
}

pub fn run_json(config: &ScenarioConfig, out: &RunOutput) -> String {
    let report =
        JsonReport { config, regime: &out.regime, records: &out.records, expectations: &out.expectations };
    let mut text = serde_json::to_string_pretty(&report).expect("records are finite");
    text.push('\n');
    text
}

pub fn render(config: &ScenarioConfig, out: &RunOutput, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => records_csv(&out.records),
        OutputFormat::Json => run_json(config, out),
    }
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(oracle: Option<f64>) -> DiagnosticRecord {
        DiagnosticRecord {
            t: 0.1,
            herm_residual_hflat: 0.0,
            min_eig_g: 1.0 / 3.0,
            cond_g: 3.0,
            metric_consistency: 1e-17,
            inner_product_re: 1.0,
            inner_product_im: -0.0,
            oracle_deviation: oracle,
            flat_norm: 1.0,
        }
    }

    #[test]
    fn csv_header_and_precision() {
        let text = records_csv(&[record(Some(2e-12)), record(None)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[0].split(',').count(), 9);
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[2].parse::<f64>().unwrap(), 1.0 / 3.0);
        let mantissa = cells[2].split('e').next().unwrap().replace('.', "");
        assert!(mantissa.len() >= 15);
        assert_eq!(lines[2].split(',').nth(7), Some(""));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn json_field_names_match_csv() {
        let json = serde_json::to_value(record(None)).unwrap();
        let keys: Vec<&str> = CSV_HEADER.split(',').collect();
        for k in &keys {
            assert!(json.get(*k).is_some(), "missing {k}");
        }
        assert_eq!(json.as_object().unwrap().len(), keys.len());
        assert!(json["oracle_deviation"].is_null());
    }

    #[test]
    fn non_finite_fields_are_named() {
        let mut r = record(None);
        assert_eq!(r.non_finite_field(), None);
        r.cond_g = f64::INFINITY;
        assert_eq!(r.non_finite_field(), Some("cond_G"));
    }
}
