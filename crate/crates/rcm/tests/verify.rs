use std::sync::Arc;

use rcm::model::ConnectionFunction;
use rcm::verify::*;

#[test]
fn smoke_suite_passes_and_serializes() {
    let rep = verify_suite(VerifyBudget::smoke(7));
    assert!(rep.all_passed, "{:#?}", rep.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    assert!(rep.checks.iter().all(|c| c.seconds >= 0.0));
    let json = serde_json::to_string(&rep).unwrap();
    let back: VerifyReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.checks.len(), rep.checks.len());
}

#[test]
fn bessel_check_passes_at_a_small_budget() {
    let checks = bessel_check(6, 100_000, 3);
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c.passed), "{checks:?}");
}

#[test]
fn bk_and_fkg_hold_trivially_at_zero_intensity() {
    // At zero intensity the four points never connect: both events are empty.
    let cf = Arc::new(ConnectionFunction::boolean(2));
    let c = bk_fkg_check(&cf, 0.0, 6.0, 200, 1);
    assert!(c.iter().all(|c| c.passed && c.statistic == 0.0), "{c:?}");
}

#[test]
fn gaussian_convolution_for_each_dimension() {
    for d in 1..=10 {
        assert!(gaussian_convolution_check(d).passed);
    }
}
