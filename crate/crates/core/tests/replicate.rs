use riskcal::replicate::{run_all, run_suite, SUITES};

#[test]
fn every_suite_passes() {
    for seed in [1, 20_240_611] {
        let reports = run_all(seed).unwrap();
        assert_eq!(reports.len(), SUITES.len());
        for r in &reports {
            assert!(r.passed, "{} (seed {seed}): {:?}", r.id, r.lines);
            assert!(!r.lines.is_empty());
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let a = serde_json::to_string(&run_suite("cash-subadditivity", 5).unwrap()).unwrap();
    let b = serde_json::to_string(&run_suite("cash-subadditivity", 5).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn quasi_convexity_suite_carries_the_witness() {
    let r = run_suite("quasi-convexity-failure", 7).unwrap();
    assert_eq!(r.data["verdict"], "fail");
    assert_eq!(r.data["witness"]["lhs"], 0.0);
    assert_eq!(r.data["witness"]["rhs"], -1.0);
}
