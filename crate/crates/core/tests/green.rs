use prabhakar_core::criteria::PROPERTY_CONFIGS;
use prabhakar_core::green::{green_property_check, validate_config, BvpConfig, GreensFunction};

#[test]
fn validated_configs_keep_their_properties_on_a_coarse_grid() {
    for &(a, b, xi, beta, rho, mu, g, w) in &PROPERTY_CONFIGS {
        let c = BvpConfig::new(a, b, xi, beta, rho, mu, g, w);
        assert!(validate_config(&c).valid);
        let r = green_property_check(&c, 40).unwrap();
        assert!(r.all_hold(), "{c:?}: {:?}", r.worst_violation);
    }
}

#[test]
fn properties_can_fail_for_strong_coupling() {
    // μ near 2 with β > 0 and γω > 0: G(·,s) is no longer increasing in t
    let c = BvpConfig::new(0.0, 1.0, 0.5, 0.1, 2.0, 2.1, 1.0, 0.5);
    assert!(validate_config(&c).valid);
    let r = green_property_check(&c, 64).unwrap();
    assert!(r.nonneg && !r.monotone && !r.bounds);
    assert!(r.worst_violation.value < -1e-3);
}

#[test]
fn vanishes_at_the_left_end() {
    let c = BvpConfig::new(-1.0, 1.0, 0.0, 0.05, 1.5, 2.7, 0.7, 0.2);
    let g = GreensFunction::new(&c).unwrap();
    for k in 0..=10 {
        assert_eq!(g.eval(-1.0, -1.0 + 0.2 * k as f64), 0.0);
    }
}

#[test]
fn invalid_configs_are_reported() {
    let r = validate_config(&BvpConfig::new(0.0, 1.0, 1.5, -0.1, 1.0, 2.5, 0.0, 0.0));
    assert!(!r.valid && !r.ordering && !r.beta_nonnegative);
    assert_eq!(r.problems.len(), 2);
    // β so large that the denominator changes sign
    let r = validate_config(&BvpConfig::new(0.0, 1.0, 0.5, 10.0, 1.0, 2.5, 0.0, 0.0));
    assert!(!r.denominator_positive && !r.valid);
}
