use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prabhakar_core::func::{PowerSum, ScalarFn, WithExponents};
use prabhakar_core::prabhakar::{
    power_law_oracle, prabhakar_derivative, prabhakar_integral, rl_integral, PrabhakarSpec,
};
use prabhakar_core::special::gamma;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn zero_gamma_is_riemann_liouville() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let a = rng.random_range(-1.0..1.0);
        let x = a + rng.random_range(0.2..2.0);
        let mu = rng.random_range(2.01..3.0);
        let order = rng.random_range(0.2..3.5);
        let terms: Vec<(f64, f64)> = (0..4).map(|p| (rng.random_range(-2.0..2.0), p as f64)).collect();
        let f = PowerSum::new(a, terms).unwrap();
        let spec = PrabhakarSpec::new(rng.random_range(0.3..2.0), mu, 0.0, rng.random_range(-1.0..1.0), a).unwrap();
        let p = prabhakar_integral(&f, x, &spec, order).unwrap().value;
        let r = rl_integral(&f, x, order, a).unwrap();
        assert!(
            (p - r).abs() <= 1e-10 * r.abs().max(1e-3 * f.terms.iter().map(|t| t.0.abs()).sum::<f64>()),
            "{p} vs {r}"
        );
    }
}

#[test]
fn integral_examples() {
    let s = PrabhakarSpec::new(1.0, 2.5, 0.3, 0.0, 0.0).unwrap();
    assert!(
        rel(
            power_law_oracle(1.0, 1.7, &s, 2.2).unwrap(),
            1.7f64.powf(2.2) / gamma(3.2)
        ) < 1e-14
    );
    let s = PrabhakarSpec::new(1.0, 2.5, 0.0, 0.6, 0.5).unwrap();
    let lin = PowerSum::new(0.5, vec![(1.0, 1.0)]).unwrap();
    let v = prabhakar_integral(&lin, 2.0, &s, 1.4).unwrap().value;
    assert!(rel(v, 1.5f64.powf(2.4) / gamma(3.4)) < 1e-12);
}

#[test]
fn integral_is_linear() {
    let spec = PrabhakarSpec::new(0.8, 2.6, 0.7, 0.4, 0.0).unwrap();
    let f = |u: f64| (2.0 * u).sin() + 1.0;
    let g = |u: f64| u * u * u - 0.5;
    let (al, be) = (1.7, -0.3);
    let h = move |u: f64| al * f(u) + be * g(u);
    for &x in &[0.3, 0.9, 1.6] {
        let (ff, gg, hh) = (
            prabhakar_integral(&f, x, &spec, 2.6).unwrap().value,
            prabhakar_integral(&g, x, &spec, 2.6).unwrap().value,
            prabhakar_integral(&h, x, &spec, 2.6).unwrap().value,
        );
        let combo = al * ff + be * gg;
        assert!(
            (hh - combo).abs() <= 1e-12 * (al * ff).abs().max((be * gg).abs()),
            "{hh} vs {combo}"
        );
    }
}

#[test]
fn derivative_is_linear_on_closed_forms() {
    // the exact path is linear term by term
    let f = PowerSum::parse("1 + 2*(s-a)^3", 0.0).unwrap();
    let g = PowerSum::parse("(s-a)^1.5 - 0.5*(s-a)^4", 0.0).unwrap();
    let (al, be) = (0.6, 2.5);
    let mut terms: Vec<(f64, f64)> = f.terms.iter().map(|&(c, p)| (al * c, p)).collect();
    terms.extend(g.terms.iter().map(|&(c, p)| (be * c, p)));
    let h = PowerSum::new(0.0, terms).unwrap();
    let d = |p: &PowerSum| p.as_ml(1.2, 0.4).unwrap().prabhakar_derivative(0.5, 2.4).unwrap();
    for &x in &[0.2, 0.5, 0.9] {
        let combo = al * d(&f).eval(x) + be * d(&g).eval(x);
        assert!(rel(d(&h).eval(x), combo) < 1e-12);
    }
}

/// The numeric derivative stops its extrapolation adaptively per input, so
/// it is linear only to its own accuracy target, not to rounding level.
#[test]
fn numeric_derivative_is_linear_to_its_accuracy() {
    let spec = PrabhakarSpec::new(1.2, 2.4, 0.5, 0.4, 0.0).unwrap();
    let f = PowerSum::parse("1 + 2*(s-a)^3", 0.0).unwrap();
    let g = PowerSum::parse("(s-a)^1.5 - 0.5*(s-a)^4", 0.0).unwrap();
    let (al, be) = (0.6, 2.5);
    let h = WithExponents {
        f: |u: f64| al * f.eval(u) + be * g.eval(u),
        exponents: vec![0.0, 1.5],
    };
    let mut worst = 0.0f64;
    for &x in &[0.2, 0.5, 0.9] {
        let df = prabhakar_derivative(&f, x, &spec).unwrap().value;
        let dg = prabhakar_derivative(&g, x, &spec).unwrap().value;
        let dh = prabhakar_derivative(&h, x, &spec).unwrap().value;
        worst = worst.max(rel(dh, al * df + be * dg));
    }
    println!("numeric derivative linearity: worst relative gap {worst:e}");
    assert!(worst <= 1e-5, "worst relative gap {worst:e}");
}

#[test]
fn nested_numeric_roundtrip() {
    // both operators numeric: D(E f) with E f evaluated by quadrature
    let a = 0.0;
    let spec = PrabhakarSpec::new(1.0, 2.5, 0.5, 0.3, a).unwrap();
    let f = PowerSum::parse("2 - (s-a) + 3*(s-a)^2", a).unwrap();
    let image = WithExponents {
        f: |u: f64| {
            if u <= a {
                0.0
            } else {
                prabhakar_integral(&f, u, &spec, spec.mu).unwrap().value
            }
        },
        exponents: vec![spec.mu, spec.mu + spec.rho],
    };
    for &x in &[0.3, 0.6, 0.9] {
        let back = prabhakar_derivative(&image, x, &spec).unwrap().value;
        assert!(rel(back, f.eval(x)) < 1e-5, "x = {x}: {back} vs {}", f.eval(x));
    }
}
