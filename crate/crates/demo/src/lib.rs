//! Browser demo over the bundled example.
//!
//! Three operations, each taking plain arguments and returning JSON text:
//! scenario optimization on the published objective, principal components
//! with quartimax rotation of the derived predictor correlation, and the PC
//! pattern of the derived correlation at a chosen alpha and sample size.
//! The functions are ordinary Rust; `wasm32` builds add thin bindings.

use mmx_core::causal::{export_dot, pc_pattern, CausalConfig, EdgeMark};
use mmx_core::example;
use mmx_core::factor::{factor_analysis, RotationSettings, Selection};
use mmx_core::scenario::{ScenarioModel, ScenarioRequest};
use serde::Serialize;

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("view serializes")
}

/// Variables, coefficients and default scenario of the published objective.
pub fn model_json() -> String {
    to_json(&ScenarioModel::published_example().view())
}

/// Solves a scenario request. Errors carry the API error body as JSON.
pub fn optimize_json(request: &str) -> Result<String, String> {
    let model = ScenarioModel::published_example();
    let req: ScenarioRequest = if request.trim().is_empty() {
        ScenarioRequest::default()
    } else {
        serde_json::from_str(request).map_err(|e| {
            to_json(&mmx_core::scenario::ScenarioError::Malformed(e.to_string()).body())
        })?
    };
    model
        .optimize(&req)
        .map(|r| to_json(&r))
        .map_err(|e| to_json(&e.body()))
}

#[derive(Debug, Serialize)]
pub struct FactorView {
    pub names: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    pub unrotated: Vec<Vec<f64>>,
    pub rotated: Vec<Vec<f64>>,
    pub score_coefficients: Vec<Vec<f64>>,
    pub sweeps_used: usize,
    pub cumulative_pct: f64,
}

fn rows(m: &mmx_core::linalg::Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Components of the derived predictor correlation; `k = 0` applies the
/// eigenvalue-above-one rule.
pub fn factor_json(k: usize, kaiser_normalize: bool) -> Result<String, String> {
    let names: Vec<String> = example::PREDICTORS.iter().map(|s| s.to_string()).collect();
    let selection = if k == 0 {
        Selection::Kaiser
    } else {
        Selection::Fixed(k)
    };
    let settings = RotationSettings {
        kaiser_normalize,
        ..RotationSettings::default()
    };
    let sol = factor_analysis(
        &names,
        &example::derived_predictor_correlation(),
        selection,
        settings,
    )
    .map_err(|e| e.to_string())?;
    let p = names.len() as f64;
    let cumulative_pct = 100.0 * sol.eigenvalues[..sol.k].iter().sum::<f64>() / p;
    Ok(to_json(&FactorView {
        names,
        eigenvalues: sol.eigenvalues.clone(),
        k: sol.k,
        unrotated: rows(&sol.loadings_unrotated),
        rotated: rows(&sol.loadings_rotated),
        score_coefficients: rows(&sol.score_coefficients),
        sweeps_used: sol.sweeps_used,
        cumulative_pct,
    }))
}

#[derive(Debug, Serialize)]
pub struct PatternEdge {
    pub from: String,
    pub to: String,
    pub directed: bool,
}

#[derive(Debug, Serialize)]
pub struct PatternView {
    pub names: Vec<String>,
    pub edges: Vec<PatternEdge>,
    pub dot: String,
}

/// PC pattern of the derived twelve-variable correlation as if estimated from
/// `n` observations.
pub fn pattern_json(alpha: f64, n: usize, stable: bool) -> Result<String, String> {
    let names: Vec<String> = example::variable_meta()
        .into_iter()
        .map(|m| m.name)
        .collect();
    let cfg = CausalConfig {
        alpha,
        stable,
        ..CausalConfig::default()
    };
    let g =
        pc_pattern(&names, &example::derived_correlation(), n, &cfg).map_err(|e| e.to_string())?;
    let edges = g
        .edges()
        .into_iter()
        .map(|e| PatternEdge {
            from: e.a,
            to: e.b,
            directed: e.mark == EdgeMark::Directed,
        })
        .collect();
    Ok(to_json(&PatternView {
        names,
        edges,
        dot: export_dot(&g),
    }))
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn model() -> String {
        super::model_json()
    }

    #[wasm_bindgen]
    pub fn optimize(request: &str) -> Result<String, JsValue> {
        super::optimize_json(request).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn factors(k: usize, kaiser_normalize: bool) -> Result<String, JsValue> {
        super::factor_json(k, kaiser_normalize).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn pattern(alpha: f64, n: usize, stable: bool) -> Result<String, JsValue> {
        super::pattern_json(alpha, n, stable).map_err(|e| JsValue::from_str(&e))
    }
}
