//! Browser bindings: a small run, a Gronwall envelope and the threshold
//! table, each taking and returning JSON text.
//!
//! The `*_json` functions are plain Rust so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use thinns::diagnostics::Regime;
use thinns::gronwall::thresholds::default_alpha;
use thinns::gronwall::{literature_thresholds, solve_envelope, InequalitySystem, ThresholdParams};
use thinns::solver::RunConfig;

/// Keeps a click in the page under a few seconds.
pub const MAX_MODES: usize = 20_000;
pub const MAX_STEPS: usize = 20_000;
pub const MAX_ENVELOPE_SAMPLES: usize = 5_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Runs the `key = value` configuration and returns the sampled series.
pub fn simulate_json(config: &str) -> Result<String, String> {
    let cfg = RunConfig::parse(config).map_err(err)?;
    let t = cfg.domain.torus();
    let modes = t.len();
    if modes > MAX_MODES {
        return Err(format!("{modes} modes is too many for the page (limit {MAX_MODES})"));
    }
    let steps = cfg.solver.n_steps();
    if steps > MAX_STEPS {
        return Err(format!("{steps} steps is too many for the page (limit {MAX_STEPS})"));
    }
    let u0 = cfg.initial_field().map_err(err)?;
    let series = cfg.solver().map_err(err)?.run(&u0).map_err(err)?;
    let col = |f: &dyn Fn(&thinns::diagnostics::Sample) -> f64| series.map(f);
    let full = Regime::Full;
    let v = json!({
        "t": col(&|s| s.t),
        "theta": col(&|s| s.theta),
        "phi": col(&|s| s.phi(full)),
        "psi": col(&|s| s.psi(full)),
        "chi": col(&|s| s.chi()),
        "h1": col(&|s| s.h1),
        "q_h1": col(&|s| s.q_h1),
        "modes": modes,
        "steps": steps,
        "config": cfg.to_kv().to_canonical(),
    });
    Ok(v.to_string())
}

/// `{"system": {...}, "horizon": T, "samples": n}` to the envelope.
pub fn envelope_json(params: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(params).map_err(err)?;
    let sys: InequalitySystem = serde_json::from_value(v["system"].clone()).map_err(|e| format!("system: {e}"))?;
    let horizon = v["horizon"].as_f64().ok_or("horizon must be a number")?;
    let samples = v["samples"].as_u64().unwrap_or(200) as usize;
    if samples == 0 || samples > MAX_ENVELOPE_SAMPLES {
        return Err(format!("samples must lie in 1..={MAX_ENVELOPE_SAMPLES}"));
    }
    let env = solve_envelope(&sys, horizon, samples).map_err(err)?;
    serde_json::to_string(&env).map_err(err)
}

/// Threshold rows for a comma-separated list of thicknesses, with
/// `alpha(eps) = 1/ln(1/eps)`.
pub fn thresholds_json(eps: &str, delta: f64, c: f64) -> Result<String, String> {
    let eps: Vec<f64> = eps
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad eps '{}': {e}", s.trim())))
        .collect::<Result<_, _>>()?;
    let rows = literature_thresholds(&eps, &ThresholdParams::uniform(delta, c), &default_alpha).map_err(err)?;
    serde_json::to_string(&json!({ "alpha": "1/ln(1/eps), plotting default", "rows": rows })).map_err(err)
}

#[wasm_bindgen]
pub fn simulate(config: &str) -> Result<String, JsValue> {
    simulate_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn envelope(params: &str) -> Result<String, JsValue> {
    envelope_json(params).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn thresholds(eps: &str, delta: f64, c: f64) -> Result<String, JsValue> {
    thresholds_json(eps, delta, c).map_err(|e| JsValue::from_str(&e))
}
