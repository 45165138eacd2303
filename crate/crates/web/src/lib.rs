//! Browser bindings: shadow paths, crossing statistics and width certificates
//! on (rationalized) regular polygons.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use shadow_simplex::geometry::local_delta;
use shadow_simplex::harness::{crossings_shifted, fan_width_sq, NormalFan};
use shadow_simplex::numeric::{format_rational, pow2, rational_from_f64, to_f64, vec_to_f64};
use shadow_simplex::pivot::shadow_simplex;
use shadow_simplex::{Matrix, Polyhedron, Rational, Vector};

const MAX_SIDES: usize = 64;
const MAX_TRIALS: usize = 20_000;

fn dyadic(x: f64) -> Rational {
    rational_from_f64(x, &pow2(24))
}

fn direction(angle: f64) -> Vector {
    vec![dyadic(angle.cos()), dyadic(angle.sin())]
}

/// Rows `(cos θᵢ, sin θᵢ)` with `θᵢ = 2πi/k`, all right-hand sides 1.
pub fn polygon(sides: usize) -> Result<Polyhedron, String> {
    if !(3..=MAX_SIDES).contains(&sides) {
        return Err(format!("sides must be in 3..={MAX_SIDES}"));
    }
    let rows = (0..sides)
        .map(|i| direction(std::f64::consts::TAU * i as f64 / sides as f64))
        .collect();
    let b = vec![Rational::from_integer(1.into()); sides];
    Polyhedron::new(Matrix::from_rows(rows).map_err(|e| e.to_string())?, b).map_err(|e| e.to_string())
}

fn fan(p: &Polyhedron) -> Result<NormalFan, String> {
    NormalFan::new(p).map_err(|e| e.to_string())
}

fn outline(fan: &NormalFan) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = fan.vertices.iter().map(|v| vec_to_f64(&v.point)).collect();
    pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    pts
}

pub fn polygon_info(sides: usize) -> Result<Value, String> {
    let p = polygon(sides)?;
    let f = fan(&p)?;
    let tau_sq = fan_width_sq(&p, &f);
    let delta_sq = local_delta(&p).map_err(|e| e.to_string())?;
    Ok(json!({
        "vertices": outline(&f),
        "tau_sq": format_rational(&tau_sq),
        "tau": to_f64(&tau_sq).sqrt(),
        "delta_sq": format_rational(&delta_sq),
    }))
}

/// Vertices visited while the objective turns from angle `c` to angle `d`.
pub fn shadow_path_json(sides: usize, c_angle: f64, d_angle: f64) -> Result<Value, String> {
    let p = polygon(sides)?;
    let f = fan(&p)?;
    let c = direction(c_angle);
    let d = direction(d_angle);
    let opt = f.optimal_set(&c);
    if opt.len() != 1 {
        return Err("start objective is normal to an edge; nudge it".into());
    }
    let start = f.vertices[opt[0]].bases[0].clone();
    let (_, trace) = shadow_simplex(&p, &c, &d, &start).map_err(|e| e.to_string())?;
    let mut path = vec![vec_to_f64(&f.vertices[opt[0]].point)];
    for r in &trace.records {
        path.push(vec_to_f64(&p.feasible_vertex(&r.basis).map_err(|e| e.to_string())?));
    }
    Ok(json!({
        "outline": outline(&f),
        "path": path,
        "lambdas": trace.records.iter().map(|r| to_f64(&r.lambda)).collect::<Vec<_>>(),
        "c": vec_to_f64(&c),
        "d": vec_to_f64(&d),
    }))
}

/// Crossings of `[X, X + (dx, dy)]` with the normal fan over `trials` samples.
pub fn crossing_stats_json(sides: usize, dx: f64, dy: f64, trials: usize, seed: u64) -> Result<Value, String> {
    if !(1..=MAX_TRIALS).contains(&trials) {
        return Err(format!("trials must be in 1..={MAX_TRIALS}"));
    }
    let p = polygon(sides)?;
    let f = fan(&p)?;
    let tau_sq = fan_width_sq(&p, &f);
    let c = vec![Rational::from_integer(0.into()); 2];
    let d = vec![dyadic(dx), dyadic(dy)];
    let r = crossings_shifted(&f, &c, &d, &tau_sq, trials, seed).map_err(|e| e.to_string())?;
    let top = r.counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; top + 1];
    for &k in &r.counts {
        histogram[k] += 1;
    }
    Ok(json!({
        "mean": r.mean,
        "stderr": r.stderr,
        "bound": r.bound,
        "pass": r.pass(),
        "histogram": histogram,
        "resamples": r.resamples,
    }))
}

fn js(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = polygonInfo)]
pub fn polygon_info_js(sides: usize) -> Result<String, JsError> {
    js(polygon_info(sides))
}

#[wasm_bindgen(js_name = shadowPath)]
pub fn shadow_path_js(sides: usize, c_angle: f64, d_angle: f64) -> Result<String, JsError> {
    js(shadow_path_json(sides, c_angle, d_angle))
}

#[wasm_bindgen(js_name = crossingStats)]
pub fn crossing_stats_js(sides: usize, dx: f64, dy: f64, trials: usize, seed: u64) -> Result<String, JsError> {
    js(crossing_stats_json(sides, dx, dy, trials, seed))
}
