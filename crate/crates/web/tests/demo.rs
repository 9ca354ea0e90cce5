use daiod_web::{Demo, SolveRequest};

fn request(noise: u32, arc: f64) -> SolveRequest {
    serde_json::from_value(serde_json::json!({
        "a_km": 7000.0, "i_deg": 75.0, "noise": noise, "arc_fraction": arc, "seed": 3, "max_entries": 16
    }))
    .unwrap()
}

#[test]
fn solve_then_query() {
    let mut demo = Demo::default();
    assert!(demo.evaluate_at(&[0.0; 6]).is_err());
    let s = demo.solve_request(&request(1, 0.04)).unwrap();
    assert!(s.truth_inside);
    assert_eq!(s.elements.len(), 5);
    for r in &s.elements {
        assert!(r.lo <= r.nominal && r.nominal <= r.hi, "{r:?}");
    }
    let centre = demo.evaluate_at(&[0.0; 6]).unwrap();
    assert!((centre.elements.a - s.elements[0].nominal).abs() < 1e-9);
    let edge = demo.evaluate_at(&[1.0, -1.0, 0.5, 0.0, -0.5, 1.0]).unwrap();
    let b = demo.orbit_set().unwrap().bounds;
    assert!(b.contains(&edge.elements));
}

#[test]
fn bad_requests_are_errors() {
    let mut demo = Demo::default();
    assert!(demo.solve_request(&request(11, 0.04)).is_err());
    let mut r = request(1, 0.04);
    r.max_entries = 0;
    assert!(demo.solve_request(&r).is_err());
    demo.solve_request(&request(1, 0.04)).unwrap();
    assert!(demo.evaluate_at(&[0.0; 5]).is_err());
    assert!(demo.evaluate_at(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.5]).is_err());
    assert!(serde_json::from_str::<SolveRequest>(r#"{"a_km": 7000}"#).is_err());
}
