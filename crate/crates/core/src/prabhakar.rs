//! Prabhakar integral and derivative operators.
//!
//! The integral of order `μ` is the convolution
//! `∫_a^x (x-u)^{μ-1} E^γ_{ρ,μ}(ω(x-u)^ρ) f(u) du`; the derivative of order
//! `μ ∈ (2, 3]` is `d³/dx³` applied to the integral of order `3-μ` with `γ`
//! negated.

use serde::Serialize;

use crate::func::ScalarFn;
use crate::quadrature::{convolve, gauss_jacobi, PowerKernel};
use crate::special::{gamma, ml3, recip_gamma, MittagLeffler, MlParams};
use crate::{Error, Result};

/// Default relative tolerance for quadrature results.
pub const QUAD_TOLERANCE: f64 = 1e-9;
/// Gauss-Legendre order per graded panel.
const ORDER_FINE: usize = 20;
const ORDER_COARSE: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrabhakarSpec {
    pub rho: f64,
    pub mu: f64,
    pub gamma: f64,
    pub omega: f64,
    pub a: f64,
    /// Integer order of the outer derivative; always 3.
    pub m: u32,
}

impl PrabhakarSpec {
    pub fn new(rho: f64, mu: f64, gamma: f64, omega: f64, a: f64) -> Result<Self> {
        let spec = PrabhakarSpec {
            rho,
            mu,
            gamma,
            omega,
            a,
            m: 3,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be > 0, got {}", self.rho)));
        }
        if !(self.mu > 2.0 && self.mu <= 3.0) {
            return Err(Error::Domain(format!("mu must lie in (2, 3], got {}", self.mu)));
        }
        if !self.gamma.is_finite() || !self.omega.is_finite() || !self.a.is_finite() {
            return Err(Error::Domain("gamma, omega and a must be finite".into()));
        }
        if self.m != 3 {
            return Err(Error::Domain(format!("m must be 3, got {}", self.m)));
        }
        Ok(())
    }
}

/// A value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// `(t-s)^{μ_eff-1} E^γ_{ρ,μ_eff}(ω(t-s)^ρ)`.
pub fn prabhakar_kernel(t: f64, s: f64, spec: &PrabhakarSpec, mu_eff: f64) -> Result<f64> {
    if !(t > s) {
        return Err(Error::Domain(format!("kernel needs t > s, got t={t}, s={s}")));
    }
    if !(mu_eff > 0.0) {
        return Err(Error::Domain(format!("mu_eff must be > 0, got {mu_eff}")));
    }
    let r = t - s;
    let e = ml3(&MlParams::new(
        spec.rho,
        mu_eff,
        spec.gamma,
        spec.omega * r.powf(spec.rho),
    )?)?;
    Ok(r.powf(mu_eff - 1.0) * e.value)
}

/// Prepared convolution `x ↦ ∫_a^x k(x-u) f(u) du` for a fixed kernel.
pub(crate) struct Convolution {
    a: f64,
    alpha: f64,
    rho: f64,
    smooth: Box<dyn Fn(f64) -> f64 + Sync>,
}

impl Convolution {
    /// Kernel `r^{μ-1} E^γ_{ρ,μ}(ω r^ρ)`, valid for `x - a ≤ span`.
    pub(crate) fn prabhakar(rho: f64, mu: f64, gamma_: f64, omega: f64, a: f64, span: f64) -> Result<Self> {
        let radius = (omega.abs() * span.powf(rho)).max(MittagLeffler::DEFAULT_RADIUS);
        let ml = MittagLeffler::with_radius(rho, mu, gamma_, radius)?;
        Ok(Convolution {
            a,
            alpha: mu - 1.0,
            rho,
            smooth: Box::new(move |r| ml.eval(omega * r.powf(rho))),
        })
    }

    /// The regular part `r^{-1} E^γ_{ρ,0}(ω r^ρ) = r^{ρ-1} ω [E^γ_{ρ,0}(z)/z]`
    /// of the order-zero operator. `None` when it vanishes (`γω = 0`).
    fn order_zero_remainder(rho: f64, gamma_: f64, omega: f64, a: f64, span: f64) -> Result<Option<Self>> {
        if gamma_ * omega == 0.0 {
            return Ok(None);
        }
        let radius = (omega.abs() * span.powf(rho)).max(MittagLeffler::DEFAULT_RADIUS);
        let ml = MittagLeffler::with_radius(rho, 0.0, gamma_, radius)?;
        let lead = gamma_ * recip_gamma(rho);
        Ok(Some(Convolution {
            a,
            alpha: rho - 1.0,
            rho,
            smooth: Box::new(move |r| {
                let z = omega * r.powf(rho);
                omega * if z == 0.0 { lead } else { ml.eval(z) / z }
            }),
        }))
    }

    pub(crate) fn apply(&self, f: &dyn ScalarFn, exps: &[f64], x: f64, order: usize) -> f64 {
        let kernel = PowerKernel {
            alpha: self.alpha,
            inner_power: self.rho,
            smooth: &*self.smooth,
        };
        convolve(&kernel, &|u| f.eval(u), exps, self.a, x, order)
    }

    fn apply_checked(&self, f: &dyn ScalarFn, x: f64, tol: f64) -> Result<QuadValue> {
        let exps = f.endpoint_exponents();
        let fine = self.apply(f, &exps, x, ORDER_FINE);
        let coarse = self.apply(f, &exps, x, ORDER_COARSE);
        let estimate = (fine - coarse).abs() + 4.0 * f64::EPSILON * fine.abs();
        if !fine.is_finite() || estimate > tol * fine.abs() + f64::MIN_POSITIVE {
            return Err(Error::Accuracy {
                value: fine,
                estimate,
                tolerance: tol,
            });
        }
        Ok(QuadValue {
            value: fine,
            error_estimate: estimate,
        })
    }
}

/// Prabhakar integral of order `mu_eff` of `f` at `x`.
pub fn prabhakar_integral(f: &dyn ScalarFn, x: f64, spec: &PrabhakarSpec, mu_eff: f64) -> Result<QuadValue> {
    prabhakar_integral_tol(f, x, spec, mu_eff, QUAD_TOLERANCE)
}

pub fn prabhakar_integral_tol(
    f: &dyn ScalarFn,
    x: f64,
    spec: &PrabhakarSpec,
    mu_eff: f64,
    tol: f64,
) -> Result<QuadValue> {
    check_point(x, spec.a)?;
    if !(mu_eff > 0.0) {
        return Err(Error::Domain(format!("mu_eff must be > 0, got {mu_eff}")));
    }
    Convolution::prabhakar(spec.rho, mu_eff, spec.gamma, spec.omega, spec.a, x - spec.a)?.apply_checked(f, x, tol)
}

/// The inner operator of the derivative: order `3-μ`, parameter `-γ`.
/// Its kernel exponent `2-μ` lies in `(-1, 0)`; `μ = 3` is rejected.
pub fn inner_prabhakar_integral_singular(f: &dyn ScalarFn, x: f64, spec: &PrabhakarSpec) -> Result<QuadValue> {
    spec.validate()?;
    if spec.mu >= 3.0 {
        return Err(Error::Domain(
            "inner integral has order 0 at mu = 3; use the classical path".into(),
        ));
    }
    let inner = PrabhakarSpec {
        gamma: -spec.gamma,
        ..*spec
    };
    prabhakar_integral_tol(f, x, &inner, 3.0 - spec.mu, 1e-8)
}

/// `Γ(ν)(x-a)^{μ_eff+ν-1} E^γ_{ρ,μ_eff+ν}(ω(x-a)^ρ)`: the Prabhakar
/// integral of `(u-a)^{ν-1}`, from term-wise Beta integrals.
pub fn power_law_oracle(nu: f64, x: f64, spec: &PrabhakarSpec, mu_eff: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("nu must be > 0, got {nu}")));
    }
    check_point(x, spec.a)?;
    let r = x - spec.a;
    let e = ml3(&MlParams::new(
        spec.rho,
        mu_eff + nu,
        spec.gamma,
        spec.omega * r.powf(spec.rho),
    )?)?;
    Ok(gamma(nu) * r.powf(mu_eff + nu - 1.0) * e.value)
}

/// Riemann-Liouville integral `(1/Γ(μ)) ∫_a^x (x-t)^{μ-1} f(t) dt`.
///
/// Computed with Gauss-Jacobi rules on the two halves of `[a, x]`: the
/// upper half carries the weight `(x-t)^{μ-1}`, the lower half the leading
/// endpoint power of `f`. Exact for polynomial `f` of moderate degree.
pub fn rl_integral(f: &dyn ScalarFn, x: f64, mu_eff: f64, a: f64) -> Result<f64> {
    check_point(x, a)?;
    if !(mu_eff > 0.0) {
        return Err(Error::Domain(format!("mu_eff must be > 0, got {mu_eff}")));
    }
    const N: usize = 40;
    let mid = 0.5 * (a + x);
    let half = 0.5 * (x - mid);
    let upper_rule = gauss_jacobi(N, mu_eff - 1.0, 0.0);
    let upper: f64 = upper_rule
        .nodes
        .iter()
        .zip(&upper_rule.weights)
        .map(|(&s, &w)| w * f.eval(mid + half * (1.0 + s)))
        .sum::<f64>()
        * half.powf(mu_eff);

    let beta = f.endpoint_exponents().into_iter().fold(f64::INFINITY, f64::min);
    let beta = if beta.is_finite() && beta > -1.0 && beta.fract() != 0.0 {
        beta
    } else {
        0.0
    };
    let lower_rule = gauss_jacobi(N, 0.0, beta);
    let lower: f64 = lower_rule
        .nodes
        .iter()
        .zip(&lower_rule.weights)
        .map(|(&s, &w)| {
            let t = a + half * (1.0 + s);
            let v = t - a;
            let core = if beta == 0.0 {
                f.eval(t)
            } else {
                f.eval(t) / v.powf(beta)
            };
            w * (x - t).powf(mu_eff - 1.0) * core
        })
        .sum::<f64>()
        * half.powf(1.0 + beta);
    Ok((upper + lower) * recip_gamma(mu_eff))
}

/// Step-size controls for the third derivative.
const DERIV_MAX_ROWS: usize = 9;
const DERIV_STOP: f64 = 1e-6;
const DERIV_TOLERANCE: f64 = 1e-5;

/// Prabhakar derivative of order `spec.mu` of `f` at `x`.
///
/// The inner integral is differentiated three times with the central
/// stencil `[I(x+2h) - 2I(x+h) + 2I(x-h) - I(x-2h)] / 2h³`, with Richardson
/// extrapolation over step halving from `h₀ = (x-a)/64`.
///
/// At `μ = 3` the inner operator has order zero. Its limit is the identity
/// plus a convolution with the weakly singular kernel
/// `r^{-1} E^{-γ}_{ρ,0}(ω r^ρ) ~ -γω r^{ρ-1}/Γ(ρ)`, so the derivative is the
/// classical `f'''` only when `γω = 0`.
pub fn prabhakar_derivative(f: &dyn ScalarFn, x: f64, spec: &PrabhakarSpec) -> Result<QuadValue> {
    spec.validate()?;
    check_point(x, spec.a)?;
    let span = 1.1 * (x - spec.a);
    let exps = f.endpoint_exponents();
    let inner: Box<dyn Fn(f64) -> f64> = if spec.mu < 3.0 {
        let conv = Convolution::prabhakar(spec.rho, 3.0 - spec.mu, -spec.gamma, spec.omega, spec.a, span)?;
        Box::new(move |y| conv.apply(f, &exps, y, ORDER_FINE))
    } else {
        match Convolution::order_zero_remainder(spec.rho, -spec.gamma, spec.omega, spec.a, span)? {
            None => Box::new(|y| f.eval(y)),
            Some(conv) => Box::new(move |y| f.eval(y) + conv.apply(f, &exps, y, ORDER_FINE)),
        }
    };
    third_derivative(&*inner, x, (x - spec.a) / 64.0)
}

/// Richardson-extrapolated third derivative; returns the best tableau entry.
pub(crate) fn third_derivative(g: &dyn Fn(f64) -> f64, x: f64, h0: f64) -> Result<QuadValue> {
    let stencil = |h: f64| (g(x + 2.0 * h) - 2.0 * g(x + h) + 2.0 * g(x - h) - g(x - 2.0 * h)) / (2.0 * h * h * h);
    let mut prev_row: Vec<f64> = vec![stencil(h0)];
    let mut best = QuadValue {
        value: prev_row[0],
        error_estimate: f64::INFINITY,
    };
    let mut h = h0;
    for i in 1..DERIV_MAX_ROWS {
        h *= 0.5;
        let mut row = vec![stencil(h)];
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let next = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(next);
        }
        let err = (row[i] - prev_row[i - 1]).abs().max((row[i] - row[i - 1]).abs());
        if err <= best.error_estimate {
            best = QuadValue {
                value: row[i],
                error_estimate: err,
            };
        }
        // once noise dominates, further halving only makes things worse
        if err <= DERIV_STOP * row[i].abs() || err > 4.0 * best.error_estimate {
            break;
        }
        prev_row = row;
    }
    if !best.value.is_finite() || best.error_estimate > DERIV_TOLERANCE * best.value.abs().max(1.0) {
        return Err(Error::Accuracy {
            value: best.value,
            estimate: best.error_estimate,
            tolerance: DERIV_TOLERANCE,
        });
    }
    Ok(best)
}

fn check_point(x: f64, a: f64) -> Result<()> {
    if !(x > a) || !x.is_finite() {
        return Err(Error::Domain(format!("evaluation point {x} must exceed a = {a}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{MlPowerSum, PowerSum, WithExponents};
    use approx::assert_relative_eq;

    fn spec(rho: f64, mu: f64, g: f64, w: f64) -> PrabhakarSpec {
        PrabhakarSpec::new(rho, mu, g, w, 0.0).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(PrabhakarSpec::new(1.0, 2.0, 0.0, 0.0, 0.0).is_err());
        assert!(PrabhakarSpec::new(1.0, 3.1, 0.0, 0.0, 0.0).is_err());
        assert!(PrabhakarSpec::new(0.0, 2.5, 0.0, 0.0, 0.0).is_err());
        assert!(PrabhakarSpec::new(1.0, 3.0, 0.0, f64::NAN, 0.0).is_err());
        assert!(PrabhakarSpec::new(1.0, 3.0, -1.0, -2.0, 5.0).is_ok());
    }

    #[test]
    fn kernel_examples() {
        let s = spec(1.0, 2.5, 1.0, 0.0);
        assert_relative_eq!(
            prabhakar_kernel(1.0, 0.0, &s, 2.5).unwrap(),
            1.0 / gamma(2.5),
            max_relative = 1e-14
        );
        let s = spec(1.0, 2.5, 1.0, 1.0);
        assert_relative_eq!(
            prabhakar_kernel(2.0, 1.0, &s, 1.0).unwrap(),
            1f64.exp(),
            max_relative = 1e-14
        );
        assert!(prabhakar_kernel(1.0, 1.0, &s, 1.0).is_err());
        assert!(prabhakar_kernel(2.0, 1.0, &s, 0.0).is_err());
    }

    #[test]
    fn integral_of_constant_and_zero() {
        let s = spec(0.7, 2.4, 0.0, 0.9);
        let v = prabhakar_integral(&|_: f64| 1.0, 1.3, &s, 2.4).unwrap();
        assert_relative_eq!(v.value, 1.3f64.powf(2.4) / gamma(3.4), max_relative = 1e-13);
        let z = prabhakar_integral(&|_: f64| 0.0, 1.3, &s, 2.4).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(prabhakar_integral(&|_: f64| 1.0, 0.0, &s, 2.4).is_err());
    }

    #[test]
    fn power_law_oracle_examples() {
        let s = spec(1.0, 2.5, 0.7, 0.0);
        assert_relative_eq!(
            power_law_oracle(1.0, 2.0, &s, 1.7).unwrap(),
            2f64.powf(1.7) / gamma(2.7),
            max_relative = 1e-14
        );
        let s = spec(1.0, 2.5, 1.0, 0.2);
        let expect = gamma(1.5) * ml3(&MlParams::new(1.0, 4.0, 1.0, 0.2).unwrap()).unwrap().value;
        let oracle = power_law_oracle(1.5, 1.0, &s, 2.5).unwrap();
        assert_relative_eq!(oracle, expect, max_relative = 1e-15);
        let f = |u: f64| u.sqrt();
        let quad = prabhakar_integral(
            &WithExponents {
                f,
                exponents: vec![0.5],
            },
            1.0,
            &s,
            2.5,
        )
        .unwrap();
        assert_relative_eq!(quad.value, oracle, max_relative = 1e-12);
    }

    #[test]
    fn rl_integral_examples() {
        let one = |_: f64| 1.0;
        assert_relative_eq!(
            rl_integral(&one, 2.0, 0.6, 1.0).unwrap(),
            1.0 / gamma(1.6),
            max_relative = 1e-13
        );
        let lin = |t: f64| t - 1.0;
        assert_relative_eq!(
            rl_integral(&lin, 3.0, 1.3, 1.0).unwrap(),
            2f64.powf(2.3) / gamma(3.3),
            max_relative = 1e-13
        );
        let v = rl_integral(&f64::cos, std::f64::consts::FRAC_PI_2, 1.0, 0.0).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-13);
        let root = WithExponents {
            f: |t: f64| t.powf(-0.5),
            exponents: vec![-0.5],
        };
        assert_relative_eq!(
            rl_integral(&root, 1.0, 2.2, 0.0).unwrap(),
            gamma(0.5) / gamma(2.7),
            max_relative = 1e-12
        );
    }

    #[test]
    fn inner_integral_examples() {
        let s = spec(0.8, 2.3, 0.0, 0.4);
        let v = inner_prabhakar_integral_singular(&|_: f64| 1.0, 0.9, &s).unwrap();
        assert_relative_eq!(v.value, 0.9f64.powf(0.7) / gamma(1.7), max_relative = 1e-13);
        let s = spec(0.8, 2.3, 0.6, 0.4);
        let f = PowerSum::new(0.0, vec![(1.0, 0.5)]).unwrap();
        let v = inner_prabhakar_integral_singular(&f, 0.9, &s).unwrap();
        let oracle = power_law_oracle(1.5, 0.9, &PrabhakarSpec { gamma: -0.6, ..s }, 0.7).unwrap();
        assert_relative_eq!(v.value, oracle, max_relative = 1e-12);
        assert!(inner_prabhakar_integral_singular(&|_: f64| 1.0, 0.9, &spec(1.0, 3.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn derivative_of_power_with_zero_gamma() {
        // Γ(ν)/Γ(ν-μ) (x-a)^{ν-μ-1}
        let s = spec(1.0, 2.5, 0.0, 0.7);
        let f = PowerSum::new(0.0, vec![(1.0, 3.2)]).unwrap();
        let d = prabhakar_derivative(&f, 0.8, &s).unwrap();
        let nu = 4.2;
        let exact = gamma(nu) / gamma(nu - 2.5) * 0.8f64.powf(nu - 2.5 - 1.0);
        assert_relative_eq!(d.value, exact, max_relative = 1e-7);
    }

    #[test]
    fn derivative_matches_closed_form_family() {
        let s = spec(0.6, 2.7, 0.4, 0.5);
        let f = MlPowerSum::single(0.0, 0.6, 0.5, 3.4, 0.3).unwrap();
        let exact = f.prabhakar_derivative(0.4, 2.7).unwrap();
        for &x in &[0.3, 0.7, 1.0] {
            let d = prabhakar_derivative(&f, x, &s).unwrap();
            assert_relative_eq!(d.value, exact.eval(x), max_relative = 1e-7);
        }
    }

    #[test]
    fn order_three_is_classical_only_without_coupling() {
        let f = PowerSum::new(0.0, vec![(1.0, 4.0)]).unwrap();
        let d = prabhakar_derivative(&f, 0.5, &spec(1.0, 3.0, 0.0, 0.8)).unwrap();
        assert_relative_eq!(d.value, 12.0, max_relative = 1e-7);
        // with γω ≠ 0 the order-zero operator keeps a regular kernel
        let s = spec(0.9, 3.0, 0.5, 0.8);
        let d = prabhakar_derivative(&f, 0.5, &s).unwrap();
        let exact = f
            .as_ml(0.9, 0.8)
            .unwrap()
            .prabhakar_derivative(0.5, 3.0)
            .unwrap()
            .eval(0.5);
        assert_relative_eq!(d.value, exact, max_relative = 1e-7);
        assert!((d.value - 12.0).abs() > 1e-3);
    }
}
