//! Browser bindings for three engine operations. Each export takes and
//! returns JSON strings; the plain Rust functions in [`ops`] do the work and
//! are what the native tests exercise.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Evaluates a case frame against the bundled lexicon.
///
/// `context` is a JSON object of appraisal flags (may be empty); `fv` is a
/// JSON object of `term: value` overrides layered over the lexicon.
#[wasm_bindgen(js_name = egcEvaluate)]
pub fn egc_evaluate(frame: &str, context: &str, fv: &str, beta: f64) -> Result<String, JsValue> {
    js(ops::evaluate(frame, context, fv, beta))
}

/// One stimulus step from `state` with a nine-element group vector,
/// reporting every group's cost and score.
#[wasm_bindgen(js_name = mstnStep)]
pub fn mstn_step(state: &str, groups: &str) -> Result<String, JsValue> {
    js(ops::step(state, groups))
}

/// Ranks the bundled spots for a six-feeling profile (0-1 each).
#[wasm_bindgen(js_name = rankSpots)]
pub fn rank_spots(profile: &str, lat: Option<f64>, lon: Option<f64>, radius_km: Option<f64>) -> Result<String, JsValue> {
    js(ops::rank(profile, lat, lon, radius_km))
}

/// The bundled spot list, for drawing the map legend.
#[wasm_bindgen(js_name = listSpots)]
pub fn list_spots() -> String {
    ops::spots()
}
