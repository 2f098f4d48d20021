//! Browser bindings: a spectral explorer for random regular graphs, the maximin value
//! along an optimal reconfiguration of a disequality cycle, and the amplification
//! parameter calculator. Each binding returns a JSON string.

use num_bigint::BigUint;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use reconf_core::amplify::{amplification_parameters, expanderize, DEFAULT_EXPANDER_SLACK};
use reconf_core::covering::sc_soundness_epsilon;
use reconf_core::gen::cycle_neq;
use reconf_core::oracle::maximin_reconf_value;
use reconf_core::rational::{format_decimal, format_ratio, parse_ratio, to_f64};
use reconf_core::spectral::{make_expander, second_eigenvalue, spectrum};
use reconf_core::{sequence_value, value, Assignment, ConstraintGraph, ReconfigurationSequence, Symbol};

/// Browser searches stay well below the native default.
pub const WEB_STATE_CAP: u64 = 200_000;
pub const MAX_EXPLORER_VERTICES: usize = 64;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// A random `d`-regular graph on `n` vertices: its spectrum, λ, and the Ramanujan
/// and expanderization thresholds for comparison.
pub fn lambda_explorer(n: usize, d: usize, seed: u64) -> Result<Value, String> {
    if n > MAX_EXPLORER_VERTICES {
        return Err(format!("at most {MAX_EXPLORER_VERTICES} vertices"));
    }
    let g = make_expander(n, d, f64::INFINITY, seed).map_err(fail)?;
    let lambda = second_eigenvalue(&g).map_err(fail)?;
    let ramanujan = 2.0 * (d.saturating_sub(1) as f64).sqrt();
    let target = 2.0 * (d as f64).sqrt() * (1.0 + DEFAULT_EXPANDER_SLACK);
    Ok(json!({
        "n": n,
        "d": d,
        "seed": seed,
        "lambda": lambda,
        "ramanujan": ramanujan,
        "expander_target": target,
        "meets_target": lambda <= target,
        "spectrum": spectrum(&g),
        "edges": g.edge_list(),
    }))
}

fn curve(g: &ConstraintGraph, seq: &ReconfigurationSequence) -> Result<Vec<f64>, String> {
    seq.steps().iter().map(|psi| value(g, psi).map(|v| to_f64(&v)).map_err(fail)).collect()
}

fn witness_summary(g: &ConstraintGraph, ini: &Assignment, tar: &Assignment) -> Result<Value, String> {
    let res = maximin_reconf_value(g, ini, tar, WEB_STATE_CAP).map_err(fail)?;
    debug_assert_eq!(sequence_value(g, &res.witness).ok().as_ref(), Some(&res.value));
    Ok(json!({
        "value": format_ratio(&res.value),
        "value_decimal": format_decimal(&res.value, 6),
        "edges": g.num_edges(),
        "curve": curve(g, &res.witness)?,
        "witness": res.witness.steps().iter().map(|a| a.values().iter().map(|s| s.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
    }))
}

/// Optimal reconfiguration of the `n`-cycle with `w`-colour disequalities from
/// `v ↦ v mod w` to `v ↦ (v+1) mod w`. With `d0 > 0` the same endpoints are also
/// solved on the expanderized cycle.
pub fn maximin_curve(n: usize, w: usize, d0: usize, seed: u64) -> Result<Value, String> {
    if n < 3 || w < 2 {
        return Err("need n ≥ 3 and at least two colours".into());
    }
    let g = cycle_neq(n, w);
    let ini = Assignment::new((0..n).map(|v| Symbol((v % w) as u32)).collect());
    let tar = Assignment::new((0..n).map(|v| Symbol(((v + 1) % w) as u32)).collect());
    let base = witness_summary(&g, &ini, &tar)?;
    let expanded = if d0 > 0 {
        let ex = expanderize(&g, d0, seed, DEFAULT_EXPANDER_SLACK).map_err(fail)?;
        let mut v = witness_summary(&ex.graph, &ini, &tar)?;
        v["expander_lambda"] = json!(ex.expander_lambda);
        v
    } else {
        Value::Null
    };
    Ok(json!({ "n": n, "w": w, "d0": d0, "base": base, "expanderized": expanded }))
}

/// Exact parameter arithmetic. Numbers are decimal or `p/q` strings; `sc_epsilon` may
/// be empty.
pub fn parameter_calculator(
    epsilon: &str,
    rho: &str,
    delta: &str,
    degree: &str,
    lambda: &str,
    sc_epsilon: &str,
) -> Result<Value, String> {
    let eps = parse_ratio(epsilon).map_err(fail)?;
    let rho = parse_ratio(rho).map_err(fail)?;
    let delta: BigUint = delta.trim().parse().map_err(|_| format!("Δ must be a positive integer, got {delta:?}"))?;
    let d = parse_ratio(degree).map_err(fail)?;
    let lam = parse_ratio(lambda).map_err(fail)?;
    let p = amplification_parameters(&eps, &rho, &delta, &d, &lam).map_err(fail)?;
    let c = p.c.to_string();
    let mut out = json!({
        "r": p.r,
        "R": p.big_r,
        "C_digits": c.len(),
        "C_leading": &c[..c.len().min(12)],
        "eps_prime": format_ratio(&p.eps_prime),
        "eps_prime_decimal": format_decimal(&p.eps_prime, 6),
        "eps_expanderized_decimal": format!("{:e}", to_f64(&p.eps_expanderized)),
        "coefficient_ok": p.coefficient_ok,
        "expander_ratio_ok": p.expander_ratio_ok,
        "c_chain_ok": p.c_chain_ok,
    });
    if !sc_epsilon.trim().is_empty() {
        let sc = sc_soundness_epsilon(&parse_ratio(sc_epsilon).map_err(fail)?, &d, &lam).map_err(fail)?;
        out["sc_eps_prime"] = json!(format_ratio(&sc));
        out["sc_eps_prime_decimal"] = json!(format_decimal(&sc, 6));
    }
    Ok(out)
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = lambdaExplorer)]
pub fn lambda_explorer_js(n: usize, d: usize, seed: u64) -> Result<String, JsError> {
    to_js(lambda_explorer(n, d, seed))
}

#[wasm_bindgen(js_name = maximinCurve)]
pub fn maximin_curve_js(n: usize, w: usize, d0: usize, seed: u64) -> Result<String, JsError> {
    to_js(maximin_curve(n, w, d0, seed))
}

#[wasm_bindgen(js_name = parameterCalculator)]
pub fn parameter_calculator_js(
    epsilon: &str,
    rho: &str,
    delta: &str,
    degree: &str,
    lambda: &str,
    sc_epsilon: &str,
) -> Result<String, JsError> {
    to_js(parameter_calculator(epsilon, rho, delta, degree, lambda, sc_epsilon))
}
