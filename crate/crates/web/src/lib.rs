//! Browser bindings. Every entry point takes and returns JSON strings; the
//! plain functions are usable natively, the `#[wasm_bindgen]` wrappers only
//! convert errors.

use std::path::Path;

use serde::Serialize;
use twistprod::geometry::{ChartDomain, MetricField};
use twistprod::Expression;
use twistprod_cli::{default_suites, parse_scene, run_suite, RunOptions, Suite};
use wasm_bindgen::prelude::*;

/// Scene files shipped with the repository, by stem.
pub const BUNDLED: &[(&str, &str)] = &[
    ("sphere_warped", include_str!("../../../scenes/sphere_warped.scene")),
    ("doubly_warped_circles", include_str!("../../../scenes/doubly_warped_circles.scene")),
    ("identity_twisted", include_str!("../../../scenes/identity_twisted.scene")),
    ("hyperbolic_twisted", include_str!("../../../scenes/hyperbolic_twisted.scene")),
    ("doubly_twisted", include_str!("../../../scenes/doubly_twisted.scene")),
    ("direct_product", include_str!("../../../scenes/direct_product.scene")),
    ("clifford_torus", include_str!("../../../scenes/clifford_torus.scene")),
    ("cylinder", include_str!("../../../scenes/cylinder.scene")),
    ("warped_circle", include_str!("../../../scenes/warped_circle.scene")),
    ("geodesic_minimal", include_str!("../../../scenes/geodesic_minimal.scene")),
    ("geodesic_normal_twist", include_str!("../../../scenes/geodesic_normal_twist.scene")),
    ("nonproduct_control", include_str!("../../../scenes/nonproduct_control.scene")),
];

#[derive(Serialize)]
struct JetOut {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<Vec<f64>>,
}

fn json_list<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<Vec<T>, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Value, gradient and Hessian of `source` at `point`.
/// `variables` and `point` are JSON arrays.
pub fn jet(source: &str, variables: &str, point: &str) -> Result<String, String> {
    let vars: Vec<String> = json_list("variables", variables)?;
    let x: Vec<f64> = json_list("point", point)?;
    let e = Expression::parse(source, &vars).map_err(|e| e.to_string())?;
    if x.len() != vars.len() {
        return Err(format!("point has {} coordinates for {} variables", x.len(), vars.len()));
    }
    let j = e.eval_jet2(&x).map_err(|e| e.to_string())?;
    let n = x.len();
    Ok(to_json(&JetOut {
        value: j.value(),
        gradient: j.grad().to_vec(),
        hessian: (0..n).map(|i| (0..n).map(|k| j.hess_at(i, k)).collect()).collect(),
    }))
}

#[derive(Serialize)]
struct ChristoffelOut {
    metric: Vec<Vec<f64>>,
    /// `[k][i][j]` = `Γ^k_ij`.
    christoffel: Vec<Vec<Vec<f64>>>,
}

/// Metric and Christoffel symbols at `point` for a metric given by rows of
/// expressions in `coords`.
pub fn christoffel(coords: &str, rows: &str, point: &str) -> Result<String, String> {
    let coords: Vec<String> = json_list("coords", coords)?;
    let rows: Vec<Vec<String>> = json_list("rows", rows)?;
    let x: Vec<f64> = json_list("point", point)?;
    if x.len() != coords.len() {
        return Err(format!("point has {} coordinates for {} names", x.len(), coords.len()));
    }
    // a unit box around the point; only the point itself is evaluated
    let triples: Vec<(&str, f64, f64)> = coords.iter().zip(&x).map(|(c, v)| (c.as_str(), v - 1.0, v + 1.0)).collect();
    let chart = ChartDomain::from_triples(&triples).map_err(|e| e.to_string())?;
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let g = MetricField::new(chart, &parsed).map_err(|e| e.to_string())?;
    let m = g.metric_at(&x).map_err(|e| e.to_string())?;
    let gamma = g.christoffel(&x).map_err(|e| e.to_string())?;
    let n = g.dim();
    Ok(to_json(&ChristoffelOut {
        metric: (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect(),
        christoffel: (0..n)
            .map(|k| (0..n).map(|i| (0..n).map(|j| gamma.get(k, i, j)).collect()).collect())
            .collect(),
    }))
}

/// Runs `suite` (or every applicable suite for `"all"`) on scene text and
/// returns the list of reports.
pub fn verify(scene: &str, suite: &str, samples: usize, seed: u64, tolerance: f64) -> Result<String, String> {
    let scene = parse_scene(scene, Path::new("scene")).map_err(|e| e.to_string())?;
    let suites = if suite == "all" {
        default_suites(&scene)
    } else {
        vec![Suite::from_name(suite).ok_or_else(|| format!("unknown suite `{suite}`"))?]
    };
    let opts = RunOptions {
        samples: samples.max(1),
        seed,
        tolerance,
    };
    let reports: Vec<_> = suites.into_iter().map(|s| run_suite(&scene, s, &opts)).collect();
    Ok(to_json(&reports))
}

#[wasm_bindgen(js_name = evaluateJet)]
pub fn evaluate_jet(source: &str, variables: &str, point: &str) -> Result<String, JsError> {
    jet(source, variables, point).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = christoffelSymbols)]
pub fn christoffel_symbols(coords: &str, rows: &str, point: &str) -> Result<String, JsError> {
    christoffel(coords, rows, point).map_err(|e| JsError::new(&e))
}

/// `seed` is a `u32` so JavaScript can pass a plain number.
#[wasm_bindgen(js_name = verifyScene)]
pub fn verify_scene(scene: &str, suite: &str, samples: u32, seed: u32, tolerance: f64) -> Result<String, JsError> {
    verify(scene, suite, samples as usize, seed as u64, tolerance).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bundledScenes)]
pub fn bundled_scenes() -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        BUNDLED.iter().map(|(k, v)| (k.to_string(), serde_json::Value::from(*v))).collect();
    to_json(&map)
}

#[wasm_bindgen(js_name = suiteNames)]
pub fn suite_names() -> String {
    to_json(&Suite::ALL.iter().map(|s| s.name()).collect::<Vec<_>>())
}
