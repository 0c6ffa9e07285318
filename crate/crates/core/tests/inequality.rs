use std::f64::consts::PI;

use prabhakar_core::green::BvpConfig;
use prabhakar_core::inequality::{
    certify, classical_hartman_wintner_check, classical_lyapunov_check, lhs_integral, rhs_bounds, Provenance,
};
use prabhakar_core::nystrom::{build_operator, spectral_scale};
use prabhakar_core::special::gamma;

fn unit(beta: f64, rho: f64, mu: f64, g: f64, w: f64) -> BvpConfig {
    BvpConfig::new(0.0, 1.0, 0.5, beta, rho, mu, g, w)
}

#[test]
fn beta_integral_value() {
    let v = lhs_integral(&unit(0.0, 1.0, 2.5, 0.0, 0.0), &|_: f64| 1.0).unwrap();
    assert!((v - 4.0 / 15.0 / gamma(2.5)).abs() < 1e-14);
    assert!((v - 0.2006007).abs() < 1e-7);
}

#[test]
fn bounds_are_ordered() {
    for &(beta, rho, mu, g, w) in &[
        (0.0, 1.0, 2.5, 0.5, 0.3),
        (0.05, 0.5, 2.2, 0.0, 0.3),
        (0.3, 1.0, 2.9, 1.0, 0.0),
        (0.1, 2.0, 3.0, 0.5, 0.5),
    ] {
        let (stated, proof) = rhs_bounds(&unit(beta, rho, mu, g, w)).unwrap();
        assert!(0.0 < proof && proof <= stated && stated <= 1.0, "{proof} {stated}");
    }
}

fn manufactured(c: &BvpConfig, factor: f64) -> prabhakar_core::inequality::InequalityReport {
    let q = |s: f64| 1.0 + s;
    let lambda = spectral_scale(&build_operator(c, &q, 200).unwrap())
        .unwrap()
        .lambda_star;
    let scaled = move |s: f64| factor * q(s) / lambda;
    certify(c, &scaled, Provenance::SpectralScaled).unwrap()
}

#[test]
fn manufactured_instances_satisfy_the_bound() {
    let r = manufactured(&unit(0.0, 1.0, 2.5, 0.0, 0.0), 1.0);
    assert!(r.holds_proof && r.rhs_proof == 1.0);
    let r = manufactured(&unit(0.1, 0.5, 2.7, 0.5, 0.3), 1.0);
    assert!(r.holds_proof, "{r:?}");
    assert_eq!(r.instance_provenance, Provenance::SpectralScaled);
}

#[test]
fn small_potentials_are_rejected() {
    // q far below the eigen-scaled one cannot support a nontrivial solution
    let r = manufactured(&unit(0.05, 1.0, 2.5, 0.5, 0.3), 0.05);
    assert!(!r.holds_proof && r.margin_proof < 0.0);
}

#[test]
fn classical_reports() {
    let l = classical_lyapunov_check(0.0, 1.0, &|_: f64| PI * PI);
    assert!((l.integral - 9.8696044).abs() < 1e-6 && l.exceeds && l.bound == 4.0);
    let h = classical_hartman_wintner_check(0.0, 1.0, &|_: f64| PI * PI);
    assert!((h.integral - 1.6449341).abs() < 1e-6 && h.exceeds);
    let h = classical_hartman_wintner_check(-2.0, 3.0, &|s: f64| s);
    assert!(h.max_identity_error <= 1e-15);
}
