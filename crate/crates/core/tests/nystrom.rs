use prabhakar_core::func::GridFunction;
use prabhakar_core::green::BvpConfig;
use prabhakar_core::nystrom::{build_operator, spectral_scale};
use prabhakar_core::special::{ml3, MlParams};

fn ml(rho: f64, mu: f64, g: f64, z: f64) -> f64 {
    ml3(&MlParams::new(rho, mu, g, z).unwrap()).unwrap().value
}

/// `x'(b) - β x(ξ)` for the solution of `D x + σ x = 0` built from the
/// series `x = Σ (-σ)^k (t-a)^{(k+1)μ-1} E^{(k+1)γ}_{ρ,(k+1)μ}(ω(t-a)^ρ)`.
fn boundary_mismatch(c: &BvpConfig, sigma: f64) -> f64 {
    let sp = &c.spec;
    let (lb, lx) = (c.b - c.a, c.xi - c.a);
    let mut sum = 0.0;
    for k in 0..200 {
        let j = (k + 1) as f64;
        let g = j * sp.gamma;
        let term = lb.powf(j * sp.mu - 2.0) * ml(sp.rho, j * sp.mu - 1.0, g, sp.omega * lb.powf(sp.rho))
            - c.beta * lx.powf(j * sp.mu - 1.0) * ml(sp.rho, j * sp.mu, g, sp.omega * lx.powf(sp.rho));
        let t = (-sigma).powi(k) * term;
        sum += t;
        if k > 5 && t.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Smallest positive `σ` with a nontrivial solution for `q ≡ σ`.
fn series_root(c: &BvpConfig) -> f64 {
    let f0 = boundary_mismatch(c, 0.0);
    assert!(f0 > 0.0);
    let mut hi = 0.25;
    while boundary_mismatch(c, hi) > 0.0 {
        hi += 0.25;
        assert!(hi < 1e3, "no root below 1000");
    }
    let mut lo = hi - 0.25;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if boundary_mismatch(c, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_configs() -> Vec<BvpConfig> {
    vec![
        BvpConfig::new(0.0, 1.0, 0.5, 0.0, 1.0, 2.5, 0.0, 0.0),
        BvpConfig::new(0.0, 1.0, 0.5, 0.1, 1.0, 2.5, 0.5, 0.5),
        BvpConfig::new(0.0, 1.0, 0.4, 0.05, 0.5, 2.2, 1.0, 0.3),
        BvpConfig::new(0.0, 1.0, 0.6, 0.1, 2.0, 3.0, 0.5, 0.5),
        BvpConfig::new(0.0, 2.0, 1.0, 0.2, 1.0, 2.7, 0.7, 0.2),
    ]
}

#[test]
fn dominant_eigenvalue_matches_series_root() {
    let one = |_: f64| 1.0;
    for c in oracle_configs() {
        let sigma = series_root(&c);
        let lambda = spectral_scale(&build_operator(&c, &one, 200).unwrap())
            .unwrap()
            .lambda_star;
        let err = (lambda * sigma - 1.0).abs();
        assert!(err < 1e-8, "{c:?}: λ* = {lambda}, 1/σ = {}, err {err:e}", 1.0 / sigma);
    }
}

#[test]
fn eigenvalue_scales_with_q() {
    let c = BvpConfig::new(0.0, 1.0, 0.5, 0.05, 1.0, 2.5, 0.5, 0.3);
    let q = |s: f64| 1.0 + s;
    let base = spectral_scale(&build_operator(&c, &q, 100).unwrap()).unwrap();
    for k in [0.1, 3.0, 250.0] {
        let qk = move |s: f64| k * (1.0 + s);
        let sk = spectral_scale(&build_operator(&c, &qk, 100).unwrap()).unwrap();
        assert!((sk.lambda_star / (k * base.lambda_star) - 1.0).abs() < 1e-12);
        let diff = sk
            .x_star
            .values()
            .iter()
            .zip(base.x_star.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "x* moved by {diff:e}");
    }
}

#[test]
fn nonnegative_coupling_gives_a_positive_operator() {
    let q = |s: f64| 1.0 + s * s;
    for c in oracle_configs() {
        let op = build_operator(&c, &q, 128).unwrap();
        let k = op.kernel_matrix();
        let scale = k.amax();
        assert!(k.min() >= -1e-12 * scale, "corrected matrix min {:e}", k.min());
        let sampled = op.sampled_kernel_matrix();
        assert!(
            sampled.min() >= -1e-12 * sampled.amax(),
            "sampled matrix min {:e}",
            sampled.min()
        );
        let row_a = op.row_at(c.a);
        assert!(row_a.iter().all(|v| v.abs() <= 1e-12 * scale));
        assert!(spectral_scale(&op).unwrap().lambda_star > 0.0);
    }
}

#[test]
fn eigenvalue_converges_with_mesh() {
    let q = |s: f64| 2.0 + (3.0 * s).cos();
    for c in oracle_configs() {
        let lambdas: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| spectral_scale(&build_operator(&c, &q, n).unwrap()).unwrap().lambda_star)
            .collect();
        let last = (lambdas[3] - lambdas[2]).abs() / lambdas[3];
        assert!(last <= 1e-6, "{c:?}: {lambdas:?}");
        // already at rounding level by n = 100, so only check it does not grow
        let first = (lambdas[1] - lambdas[0]).abs() / lambdas[3];
        assert!(first <= 1e-6, "{c:?}: {lambdas:?}");
    }
}

#[test]
fn residuals_detect_perturbations() {
    let c = BvpConfig::new(0.0, 1.0, 0.5, 0.05, 1.0, 2.5, 0.5, 0.3);
    let q = |s: f64| 1.0 + s;
    let op = build_operator(&c, &q, 200).unwrap();
    let sc = spectral_scale(&op).unwrap();
    let scaled = op.scaled(1.0 / sc.lambda_star);
    let clean = scaled.verify(&sc.x_star).unwrap();
    assert!(clean.pass && !clean.trivial, "{clean:?}");

    let zero = GridFunction::new(op.nodes().to_vec(), vec![0.0; op.len()]).unwrap();
    let z = scaled.verify(&zero).unwrap();
    assert!(z.trivial && z.integral_residual == 0.0 && z.bc_b == 0.0);

    // a 1% relative perturbation leaves a residual of about that size
    let mut r1 = 0.0;
    for eps in [0.01, 0.02] {
        let noisy: Vec<f64> = sc
            .x_star
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * (1.0 + eps * if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let r = scaled
            .verify(&GridFunction::new(op.nodes().to_vec(), noisy).unwrap())
            .unwrap()
            .integral_residual;
        assert!(r > 1e-3 * eps && r < 10.0 * eps, "eps {eps}: residual {r:e}");
        if eps == 0.01 {
            r1 = r;
        } else {
            assert!((r / r1 - 2.0).abs() < 1e-6);
        }
    }

    let wrong_nodes = GridFunction::new((0..op.len()).map(|i| i as f64).collect(), vec![1.0; op.len()]).unwrap();
    assert!(scaled.verify(&wrong_nodes).is_err());
}
