//! Browser bindings. Every export takes and returns JSON text so the page can
//! stay plain JavaScript.

use metaline::circuit::sweep;
use metaline::dispersion::{consistency_report, dispersion_curve};
use metaline::metrics::compute_metrics;
use metaline::synthesis::{synthesize, SynthesisConfig};
use metaline::{FrequencyGrid, UnitCellParams};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub cell: UnitCellParams,
    pub grid: FrequencyGrid,
    #[serde(default = "one")]
    pub stages: usize,
    #[serde(default = "fifty")]
    pub z0_ohm: f64,
}

fn one() -> usize {
    1
}
fn fifty() -> f64 {
    50.0
}

#[derive(Debug, Serialize)]
struct Response {
    frequency_hz: Vec<f64>,
    s21_db: Vec<f64>,
    s11_db: Vec<f64>,
    metrics: Option<metaline::metrics::FilterMetrics>,
    metrics_error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Dispersion {
    frequency_hz: Vec<f64>,
    beta_l_rad: Vec<f64>,
    alpha_l_neper: Vec<f64>,
    report: metaline::dispersion::ConsistencyReport,
}

fn parse<'a, T: Deserialize<'a>>(json: &'a str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// |s21| and |s11| in dB over the grid, plus filter metrics when a band is found.
pub fn response_json(request: &str) -> Result<String, String> {
    let r: Request = parse(request)?;
    let table = sweep(&r.cell, &r.grid, r.stages, r.z0_ohm)
        .map_err(|e| e.to_string())?
        .table;
    let (metrics, metrics_error) = match compute_metrics(&table) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    to_json(&Response {
        frequency_hz: table.frequencies(),
        s21_db: table.s21_db(),
        s11_db: table.s11_db(),
        metrics,
        metrics_error,
    })
}

/// Bloch phase and attenuation per cell, and the closed-form consistency report
/// against a 730 MHz reference center.
pub fn dispersion_json(request: &str) -> Result<String, String> {
    let r: Request = parse(request)?;
    let curve = dispersion_curve(&r.cell, &r.grid).map_err(|e| e.to_string())?;
    let report = consistency_report(&r.cell, Some(730e6)).map_err(|e| e.to_string())?;
    to_json(&Dispersion {
        frequency_hz: curve.points.iter().map(|p| p.frequency_hz).collect(),
        beta_l_rad: curve.points.iter().map(|p| p.beta_l_rad).collect(),
        alpha_l_neper: curve.points.iter().map(|p| p.alpha_l_neper).collect(),
        report,
    })
}

/// Runs the optimizer on a synthesis config; missing fields take the defaults.
pub fn synthesize_json(config: &str) -> Result<String, String> {
    let cfg: SynthesisConfig = parse(config)?;
    cfg.validate().map_err(|e| e.to_string())?;
    to_json(&synthesize(&cfg).map_err(|e| e.to_string())?)
}

#[wasm_bindgen]
pub fn response(request: &str) -> Result<String, JsError> {
    response_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dispersion(request: &str) -> Result<String, JsError> {
    dispersion_json(request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthesis(config: &str) -> Result<String, JsError> {
    synthesize_json(config).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const SWAPPED: &str = r#"{"cell": {"c_l_farad": 0.3e-12, "l_r_henry": 10.3e-9, "c_farad": 2.1e-12,
        "c_r_farad": 4.1e-12, "l_l_henry": 0.7e-9, "swap_inductors": true},
        "grid": {"start_hz": 0.5e9, "stop_hz": 1.0e9, "points": 501}}"#;

    #[test]
    fn response_carries_curves_and_metrics() {
        let v: Value = serde_json::from_str(&response_json(SWAPPED).unwrap()).unwrap();
        assert_eq!(v["frequency_hz"].as_array().unwrap().len(), 501);
        assert_eq!(v["s21_db"].as_array().unwrap().len(), 501);
        let f0 = v["metrics"]["f0_hz"].as_f64().unwrap();
        assert!((f0 - 712e6).abs() < 5e6, "{f0}");
        assert!(v["metrics_error"].is_null());
    }

    #[test]
    fn missing_band_is_reported_not_fatal() {
        let req = SWAPPED.replace("0.5e9", "2.0e9").replace("1.0e9", "2.2e9");
        let v: Value = serde_json::from_str(&response_json(&req).unwrap()).unwrap();
        assert!(v["metrics"].is_null());
        assert!(v["metrics_error"].is_string());
    }

    #[test]
    fn dispersion_reports_the_swapped_band() {
        let v: Value = serde_json::from_str(&dispersion_json(SWAPPED).unwrap()).unwrap();
        let f_cl = v["report"]["numeric"]["f_cl_hz"].as_f64().unwrap();
        assert!((f_cl - 710.935e6).abs() < 0.1e6, "{f_cl}");
        assert_eq!(v["report"]["center_mismatch"], false);
    }

    #[test]
    fn bad_requests_are_errors() {
        assert!(response_json("{}").is_err());
        assert!(response_json(&SWAPPED.replace("501", "1")).is_err());
        assert!(synthesize_json(r#"{"stages": 0}"#).is_err());
    }

    #[test]
    fn synthesis_from_the_swapped_design_converges() {
        let cfg = r#"{"base": {"c_l_farad": 0.3e-12, "l_r_henry": 10.3e-9, "c_farad": 2.1e-12,
            "c_r_farad": 4.1e-12, "l_l_henry": 0.7e-9, "swap_inductors": true}}"#;
        let v: Value = serde_json::from_str(&synthesize_json(cfg).unwrap()).unwrap();
        assert_eq!(v["converged"], true);
    }
}
