//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes the problem as plain arguments and returns a JSON
//! string; the `*_json` functions hold the logic so they can be tested
//! natively.

use coverage_core::homotopy::TrackerOptions;
use coverage_core::lloyd::{lloyd_run, LloydOptions};
use coverage_core::optimizer::{global_minimum, Candidate, Census, Method};
use coverage_core::problem::voronoi_cells;
use coverage_core::CoverageProblem;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Iterates kept in a Lloyd reply; the page only draws the path.
const MAX_TRACE_POINTS: usize = 400;

#[derive(Serialize)]
struct SolveReply {
    winner: Candidate,
    candidates: Vec<Candidate>,
    counts: Census,
    failed_paths: usize,
    density: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct LloydReply {
    path: Vec<Vec<f64>>,
    final_positions: Vec<f64>,
    objective: f64,
    grad_norm: f64,
    iterations: usize,
    terminated_by: &'static str,
}

#[derive(Serialize)]
struct EvaluateReply {
    objective: f64,
    gradient: Vec<f64>,
    cells: Vec<(f64, f64)>,
    density: Vec<[f64; 2]>,
}

fn problem(a: f64, b: f64, m: usize, phi: &str, f: &str) -> Result<CoverageProblem, String> {
    CoverageProblem::parse(a, b, m, phi, f).map_err(|e| e.to_string())
}

fn density(p: &CoverageProblem) -> Vec<[f64; 2]> {
    let (a, b) = (p.a(), p.b());
    (0..=200)
        .map(|k| {
            let x = a + (b - a) * k as f64 / 200.0;
            [x, p.density_at(x)]
        })
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

pub fn solve_json(a: f64, b: f64, m: usize, phi: &str, f: &str, seed: u64) -> Result<String, String> {
    let p = problem(a, b, m, phi, f)?;
    let opts = TrackerOptions {
        seed,
        threads: 1,
        ..TrackerOptions::default()
    };
    let r = global_minimum(&p, Method::TotalDegree, &opts).map_err(|e| e.to_string())?;
    Ok(to_json(&SolveReply {
        failed_paths: r.search.failed_paths(),
        winner: r.winner,
        candidates: r.search.candidates,
        counts: r.counts,
        density: density(&p),
    }))
}

pub fn lloyd_json(a: f64, b: f64, phi: &str, f: &str, initial: &[f64]) -> Result<String, String> {
    let p = problem(a, b, initial.len(), phi, f)?;
    let t = lloyd_run(&p, initial, &LloydOptions::default()).map_err(|e| e.to_string())?;
    let stride = t.iterates.len().div_ceil(MAX_TRACE_POINTS).max(1);
    let mut path: Vec<Vec<f64>> = t.iterates.iter().step_by(stride).map(|i| i.positions.clone()).collect();
    let last = t.last();
    if path.last() != Some(&last.positions) {
        path.push(last.positions.clone());
    }
    Ok(to_json(&LloydReply {
        path,
        final_positions: last.positions.clone(),
        objective: last.objective,
        grad_norm: last.grad_norm,
        iterations: t.iterates.len() - 1,
        terminated_by: t.terminated_by.label(),
    }))
}

pub fn evaluate_json(a: f64, b: f64, phi: &str, f: &str, positions: &[f64]) -> Result<String, String> {
    let p = problem(a, b, positions.len(), phi, f)?;
    let objective = p.objective(positions).map_err(|e| e.to_string())?;
    let gradient = p.gradient(positions).map_err(|e| e.to_string())?;
    let cells = voronoi_cells(positions, a, b).map_err(|e| e.to_string())?;
    Ok(to_json(&EvaluateReply {
        objective,
        gradient,
        cells,
        density: density(&p),
    }))
}

/// All stationary configurations and the certified global minimum.
#[wasm_bindgen]
pub fn solve(a: f64, b: f64, m: usize, phi: &str, f: &str, seed: u64) -> Result<String, JsError> {
    solve_json(a, b, m, phi, f, seed).map_err(|e| JsError::new(&e))
}

/// Lloyd descent from `initial`, with a thinned iterate path.
#[wasm_bindgen]
pub fn lloyd(a: f64, b: f64, phi: &str, f: &str, initial: Vec<f64>) -> Result<String, JsError> {
    lloyd_json(a, b, phi, f, &initial).map_err(|e| JsError::new(&e))
}

/// Objective, gradient and Voronoi cells of one configuration.
#[wasm_bindgen]
pub fn evaluate(a: f64, b: f64, phi: &str, f: &str, positions: Vec<f64>) -> Result<String, JsError> {
    evaluate_json(a, b, phi, f, &positions).map_err(|e| JsError::new(&e))
}
