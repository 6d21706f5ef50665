//! Browser bindings for the greedy-sparse demo page. Each export returns a
//! JSON string of curves for the page to plot.

use greedy_sparse::bounds::{apriori_bound, aposteriori_bound, sigma_btq_bracket, BoundParams};
use greedy_sparse::dictionary::{build_br1, build_bt3, build_btq, random_dictionary};
use greedy_sparse::experiment::random_hull_element;
use greedy_sparse::greedy::{run_oga, run_rga, run_wcga, run_wgafr};
use greedy_sparse::projection::{project_lq, DEFAULT_TOL};
use greedy_sparse::{LqSpace, TieBreakPolicy, WeaknessSequence};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_STEPS: usize = 200;

#[derive(Debug, Serialize, PartialEq)]
pub struct GreedyCurve {
    pub m: Vec<usize>,
    pub residual: Vec<f64>,
    pub exact: Vec<f64>,
    pub labels: Vec<String>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BracketCurve {
    pub m: Vec<usize>,
    pub sigma: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BoundCurve {
    pub m: Vec<usize>,
    pub residual: Vec<f64>,
    pub apriori: Vec<f64>,
    pub aposteriori: Vec<f64>,
    pub defects: Vec<f64>,
}

fn steps(m_max: usize) -> Result<usize, String> {
    if (1..=MAX_STEPS).contains(&m_max) {
        Ok(m_max)
    } else {
        Err(format!("steps must be between 1 and {MAX_STEPS}"))
    }
}

/// Greedy run on an adversarial dictionary. `delta = 0` gives the unperturbed
/// construction.
pub fn adversarial(algorithm: &str, policy: &str, m_max: usize, delta: f64) -> Result<GreedyCurve, String> {
    let m_max = steps(m_max)?;
    let policy: TieBreakPolicy = policy.parse().map_err(|e| format!("{e}"))?;
    let n = m_max + 2;
    let (dict, f) = if delta == 0.0 {
        build_bt3(n)
    } else {
        build_br1(n, delta)
    }
    .map_err(|e| e.to_string())?;
    let space = LqSpace::hilbert(n).map_err(|e| e.to_string())?;
    let trace = match algorithm {
        "oga" => run_oga(&f, &dict, m_max, policy),
        "rga" => run_rga(&f, &dict, m_max, &space, policy),
        other => return Err(format!("unknown algorithm `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    let scale = std::f64::consts::FRAC_1_SQRT_2 - delta;
    Ok(GreedyCurve {
        m: trace.steps.iter().map(|s| s.m).collect(),
        residual: trace.steps.iter().map(|s| s.residual_norm).collect(),
        exact: trace.steps.iter().map(|s| scale / (s.m as f64 + 1.0).sqrt()).collect(),
        labels: trace.steps.iter().map(|s| s.atom_label.clone()).collect(),
    })
}

/// Projection error onto the first `m` atoms of the `l_q` construction
/// against its two-sided bracket.
pub fn bracket(q: f64, m_max: usize) -> Result<BracketCurve, String> {
    let m_max = steps(m_max)?.min(40);
    let n = m_max + 2;
    let (dict, f) = build_btq(n, q).map_err(|e| e.to_string())?;
    let space = LqSpace::new(q, n).map_err(|e| e.to_string())?;
    let mut curve = BracketCurve {
        m: Vec::new(),
        sigma: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for m in 1..=m_max {
        let proj = project_lq(&f, &dict.atoms()[..m], &space, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let (lo, hi) = sigma_btq_bracket(m, q).map_err(|e| e.to_string())?;
        curve.m.push(m);
        curve.sigma.push(proj.residual_norm);
        curve.lower.push(lo);
        curve.upper.push(hi);
    }
    Ok(curve)
}

/// Residuals of a weak Chebyshev (or free-relaxation) run on a random
/// instance, with both error bounds.
pub fn bounds(algorithm: &str, q: f64, tau: f64, seed: u64, m_max: usize) -> Result<BoundCurve, String> {
    let m_max = steps(m_max)?;
    let dim = 32;
    let space = LqSpace::new(q, dim).map_err(|e| e.to_string())?;
    let dict = random_dictionary(&space, 2 * dim, seed).map_err(|e| e.to_string())?;
    let f = random_hull_element(&dict, 24, seed).map_err(|e| e.to_string())?;
    let tau = WeaknessSequence::constant(tau).map_err(|e| e.to_string())?;
    let params = BoundParams::new(&space, 0.0, 1.0, tau.clone()).map_err(|e| e.to_string())?;
    let policy = TieBreakPolicy::LowestIndex;
    let trace = match algorithm {
        "wcga" => run_wcga(&f, &dict, &tau, m_max, &space, policy),
        "wgafr" => run_wgafr(&f, &dict, &tau, m_max, &space, policy),
        other => return Err(format!("unknown algorithm `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    let defects = trace.defects();
    let mut curve = BoundCurve {
        m: Vec::new(),
        residual: Vec::new(),
        apriori: Vec::new(),
        aposteriori: Vec::new(),
        defects: defects.clone(),
    };
    for s in &trace.steps {
        curve.m.push(s.m);
        curve.residual.push(s.residual_norm);
        curve.apriori.push(apriori_bound(s.m, &params).map_err(|e| e.to_string())?);
        curve
            .aposteriori
            .push(aposteriori_bound(s.m, &params, &defects).map_err(|e| e.to_string())?);
    }
    Ok(curve)
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsValue> {
    value
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = adversarialRun)]
pub fn adversarial_run(algorithm: &str, policy: &str, steps: usize, delta: f64) -> Result<String, JsValue> {
    to_js(adversarial(algorithm, policy, steps, delta))
}

#[wasm_bindgen(js_name = bracketCurve)]
pub fn bracket_curve(q: f64, steps: usize) -> Result<String, JsValue> {
    to_js(bracket(q, steps))
}

#[wasm_bindgen(js_name = boundCurves)]
pub fn bound_curves(algorithm: &str, q: f64, tau: f64, seed: u32, steps: usize) -> Result<String, JsValue> {
    to_js(bounds(algorithm, q, tau, u64::from(seed), steps))
}
