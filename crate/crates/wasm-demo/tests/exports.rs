use qdyn_wasm_demo::{entropy_trace_json, scheme_curves_json, twirl_json};
use serde_json::Value;

#[test]
fn curves_span_the_eigenvalue_range() {
    let v: Value = serde_json::from_str(&scheme_curves_json(11).unwrap()).unwrap();
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 11);
    let first = &pts[0];
    assert!((first["p"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((first["dense_coding"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-10);
    let last = &pts[10];
    // pure site state: every scheme carries one bit
    for key in ["classical", "weyl", "dense_coding"] {
        assert!(
            (last[key].as_f64().unwrap() - 2f64.ln()).abs() < 1e-10,
            "{key}"
        );
    }
    for p in pts {
        let rate = p["entropy_rate"].as_f64().unwrap();
        assert!((p["dense_coding"].as_f64().unwrap() - rate).abs() < 1e-10);
    }
}

#[test]
fn trace_for_weyl_partition() {
    let v: Value = serde_json::from_str(&entropy_trace_json(0.75, "weyl", 3).unwrap()).unwrap();
    for inc in v["increments"].as_array().unwrap() {
        assert!((inc.as_f64().unwrap() - 1.255482).abs() < 1e-6);
    }
    assert!(entropy_trace_json(1.5, "weyl", 3).is_err());
    assert!(entropy_trace_json(0.5, "bogus", 3).is_err());
    let v: Value = serde_json::from_str(&entropy_trace_json(0.5, "weyl", 99).unwrap()).unwrap();
    assert_eq!(
        v["entropies"].as_array().unwrap().len(),
        qdyn_wasm_demo::MAX_N
    );
}

#[test]
fn twirl_is_scalar() {
    let v: Value = serde_json::from_str(&twirl_json(4, 3).unwrap()).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert!(twirl_json(4, 0).is_err());
}
