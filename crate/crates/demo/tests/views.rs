use mmx_core::example;
use mmx_demo::{factor_json, model_json, optimize_json, pattern_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn model_lists_eleven_channels() {
    let m = parse(&model_json());
    assert_eq!(m["variables"].as_array().unwrap().len(), 11);
    assert_eq!(m["intercept"].as_f64().unwrap(), example::FACTOR_INTERCEPT);
}

#[test]
fn default_scenario_is_the_published_optimum() {
    let r = parse(&optimize_json("").unwrap());
    let z: Vec<f64> = r["solution"]["z_star"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(z, example::OPTIMAL_Z.to_vec());
    assert!((r["solution"]["objective_value"].as_f64().unwrap() - 1850194.49).abs() <= 0.05);
}

#[test]
fn scenario_errors_carry_reasons() {
    let e = parse(&optimize_json(r#"{"lower":{"sam":3},"upper":{"sam":0}}"#).unwrap_err());
    assert_eq!(e["reason"], "InfeasibleBounds");
    assert_eq!(e["variable"], "sam");
    let e = parse(&optimize_json("{").unwrap_err());
    assert_eq!(e["status"], "malformed");
}

#[test]
fn factor_view_shapes() {
    let v = parse(&factor_json(0, true).unwrap());
    let k = v["k"].as_u64().unwrap() as usize;
    assert!(k >= 1);
    for key in ["unrotated", "rotated", "score_coefficients"] {
        let rows = v[key].as_array().unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r.as_array().unwrap().len() == k));
    }
    let eig: f64 = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((eig - 11.0).abs() < 1e-9);

    let three = parse(&factor_json(3, false).unwrap());
    assert_eq!(three["k"], 3);
    assert!(factor_json(12, true).is_err());
}

#[test]
fn pattern_view_tracks_alpha() {
    let loose = parse(&pattern_json(0.2, 71, false).unwrap());
    let strict = parse(&pattern_json(1e-6, 71, false).unwrap());
    let edges = |v: &Value| v["edges"].as_array().unwrap().len();
    assert!(edges(&strict) <= edges(&loose));
    assert_eq!(loose["names"].as_array().unwrap().len(), 12);
    assert!(loose["dot"]
        .as_str()
        .unwrap()
        .starts_with("digraph pattern {"));
    assert!(pattern_json(0.05, 71, true).is_ok());
    assert!(pattern_json(1.5, 71, false).is_err());
}
