use coverage_web::{evaluate_json, lloyd_json, solve_json};
use serde_json::Value;

#[test]
fn solve_reports_the_symmetric_optimum() {
    let v: Value = serde_json::from_str(&solve_json(0.0, 1.0, 3, "x*(1-x)", "s", 0).unwrap()).unwrap();
    let w: Vec<f64> = serde_json::from_value(v["winner"]["positions"].clone()).unwrap();
    assert!((w[0] + w[2] - 1.0).abs() < 1e-9 && (w[1] - 0.5).abs() < 1e-9);
    assert_eq!(v["counts"]["complex"], 44);
    assert_eq!(v["density"].as_array().unwrap().len(), 201);
}

#[test]
fn lloyd_path_is_thinned_and_ends_at_the_final_point() {
    let v: Value = serde_json::from_str(&lloyd_json(0.0, 1.0, "x*(1-x)", "s", &[0.1, 0.5, 0.9]).unwrap()).unwrap();
    let path = v["path"].as_array().unwrap();
    assert!(path.len() <= 401);
    assert_eq!(path.last().unwrap(), &v["final_positions"]);
}

#[test]
fn evaluate_and_errors() {
    let v: Value = serde_json::from_str(&evaluate_json(0.0, 1.0, "x*(1-x)", "s", &[0.2, 0.5, 0.8]).unwrap()).unwrap();
    assert!(v["gradient"][1].as_f64().unwrap().abs() < 1e-15);
    assert_eq!(v["cells"][0][1].as_f64().unwrap(), 0.35);
    assert!(evaluate_json(0.0, 1.0, "x*(1-", "s", &[0.5]).unwrap_err().contains("parse error"));
    assert!(evaluate_json(0.0, 1.0, "1", "s", &[0.8, 0.2]).is_err());
}
