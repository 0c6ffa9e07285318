//! The Hartman-Wintner-type necessary condition
//!
//! ```text
//! ∫_a^b G(b,s) |q(s)| ds ≥ 1 / (1 + Λ)
//! ```
//!
//! for a nontrivial solution, evaluated with both amplification factors
//! `Λ_ξ` and `Λ_b`, plus the classical Lyapunov and Hartman-Wintner bounds.

use serde::Serialize;

use crate::func::ScalarFn;
use crate::green::{BvpConfig, GreensFunction};
use crate::quadrature::{grading_levels, integrate_graded, weakest_exponent, End};
use crate::Result;

/// Absolute slack on the margin before an instance counts as violating.
pub const MARGIN_TOLERANCE: f64 = -1e-8;
const PIECES: usize = 16;
const ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SpectralScaled,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs_stated: f64,
    pub rhs_proof: f64,
    pub lambda_xi: f64,
    pub lambda_b: f64,
    pub margin_stated: f64,
    pub margin_proof: f64,
    pub holds_stated: bool,
    pub holds_proof: bool,
    pub instance_provenance: Provenance,
}

/// `∫_a^b G(b,s) |q(s)| ds`. Only `s = b` is singular, through `(b-s)^{μ-2}`.
pub fn lhs_integral(cfg: &BvpConfig, q: &dyn ScalarFn) -> Result<f64> {
    let g = GreensFunction::new(cfg)?;
    let sp = &cfg.spec;
    let levels = grading_levels(weakest_exponent(&[sp.mu - 2.0, sp.mu - 2.0 + sp.rho, sp.mu - 1.0]));
    Ok(piecewise(cfg.a, cfg.b, levels, |s| g.eval(cfg.b, s) * q.eval(s).abs()))
}

/// Composite rule: uniform pieces, the last one graded toward `b`.
fn piecewise(a: f64, b: f64, levels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / PIECES as f64;
    (0..PIECES)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == PIECES { b } else { lo + h };
            let lv = if k + 1 == PIECES { levels } else { 0 };
            integrate_graded(lo, hi, End::Upper, lv, ORDER, &f)
        })
        .sum()
}

/// `((1+Λ_ξ)^{-1}, (1+Λ_b)^{-1})`.
pub fn rhs_bounds(cfg: &BvpConfig) -> Result<(f64, f64)> {
    let (lb, lx) = GreensFunction::new(cfg)?.amplification_factors();
    Ok((1.0 / (1.0 + lx), 1.0 / (1.0 + lb)))
}

pub fn certify(cfg: &BvpConfig, q: &dyn ScalarFn, provenance: Provenance) -> Result<InequalityReport> {
    let lhs = lhs_integral(cfg, q)?;
    let (lambda_b, lambda_xi) = GreensFunction::new(cfg)?.amplification_factors();
    let rhs_stated = 1.0 / (1.0 + lambda_xi);
    let rhs_proof = 1.0 / (1.0 + lambda_b);
    let margin_stated = lhs - rhs_stated;
    let margin_proof = lhs - rhs_proof;
    Ok(InequalityReport {
        lhs,
        rhs_stated,
        rhs_proof,
        lambda_xi,
        lambda_b,
        margin_stated,
        margin_proof,
        holds_stated: margin_stated >= MARGIN_TOLERANCE,
        holds_proof: margin_proof >= MARGIN_TOLERANCE,
        instance_provenance: provenance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    /// `∫_a^b |q|`.
    pub integral: f64,
    /// `4 / (b-a)`.
    pub bound: f64,
    pub exceeds: bool,
}

/// `∫|q| > 4/(b-a)` is necessary for `x'' + q x = 0`, `x(a) = x(b) = 0`.
pub fn classical_lyapunov_check(a: f64, b: f64, q: &dyn ScalarFn) -> LyapunovReport {
    let integral = piecewise(a, b, 0, |s| q.eval(s).abs());
    let bound = 4.0 / (b - a);
    LyapunovReport {
        integral,
        bound,
        exceeds: integral > bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HartmanWintnerReport {
    /// `∫_a^b (b-s)(s-a) q⁺(s) ds`.
    pub integral: f64,
    /// `b - a`.
    pub bound: f64,
    pub exceeds: bool,
    /// `(b-s)(s-a)` at the midpoint and its claimed maximum `(b-a)²/4`.
    pub midpoint_value: f64,
    pub max_value: f64,
    pub max_identity_error: f64,
}

pub fn classical_hartman_wintner_check(a: f64, b: f64, q: &dyn ScalarFn) -> HartmanWintnerReport {
    let integral = piecewise(a, b, 0, |s| (b - s) * (s - a) * q.eval(s).max(0.0));
    let mid = 0.5 * (a + b);
    let midpoint_value = (b - mid) * (mid - a);
    let max_value = (b - a) * (b - a) / 4.0;
    HartmanWintnerReport {
        integral,
        bound: b - a,
        exceeds: integral > b - a,
        midpoint_value,
        max_value,
        max_identity_error: (midpoint_value - max_value).abs(),
    }
}
