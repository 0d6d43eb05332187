//! wasm-bindgen bindings for the browser demo in `www/`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

/// JSON `{svg, algorithm, energy_mj, nodvfs_energy_mj, misses, violations, ...}`.
#[wasm_bindgen(js_name = scheduleSvg)]
pub fn schedule_svg(taskset_json: &str, platform_json: &str, algorithm: &str, grid_points: usize) -> Result<String, JsValue> {
    to_js(demo::schedule(taskset_json, platform_json, algorithm, grid_points))
}

/// JSON `{svg, im_a, im_b, cp_1, cp_2}`.
#[wasm_bindgen(js_name = heteroWrapSvg)]
pub fn hetero_wrap_svg(shares_json: &str, big_cores: usize, little_cores: usize) -> Result<String, JsValue> {
    to_js(demo::hetero_wrap(shares_json, [big_cores, little_cores]))
}

/// JSON `{svg, low_speed, high_speed, lambda, average_power_mw}`.
#[wasm_bindgen(js_name = twoSpeedSvg)]
pub fn two_speed_svg(core_type: usize, demand: f64) -> Result<String, JsValue> {
    to_js(demo::two_speed(core_type, demand))
}

#[wasm_bindgen(js_name = fixtureTaskset)]
pub fn fixture_taskset(kind: &str, index: usize) -> Result<String, JsValue> {
    demo::fixture_taskset(kind, index).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = fixturePlatform)]
pub fn fixture_platform(big: usize, little: usize) -> Result<String, JsValue> {
    demo::fixture_platform(big, little).map_err(|e| JsValue::from_str(&e))
}
