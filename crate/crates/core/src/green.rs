//! Green's function of the nonlocal problem
//! `D x + q x = 0`, `x(a) = x'(a) = 0`, `x'(b) = β x(ξ)`.
//!
//! With `φ(t) = (t-a)^{μ-1} E^γ_{ρ,μ}(ω(t-a)^ρ)`,
//! `B(s) = (b-s)^{μ-2} E^γ_{ρ,μ-1}(ω(b-s)^ρ)` and `D₀ = B(a)`:
//!
//! ```text
//! G(t,s) = φ(t) B(s) / D₀ - k(t-s) 1{s ≤ t},   k(r) = r^{μ-1} E^γ_{ρ,μ}(ω r^ρ)
//! ```

use rayon::prelude::*;
use serde::Serialize;

use crate::prabhakar::PrabhakarSpec;
use crate::special::MittagLeffler;
use crate::{Error, Result};

/// Absolute slack for the sign and ordering checks.
pub const PROPERTY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BvpConfig {
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub beta: f64,
    pub spec: PrabhakarSpec,
}

impl BvpConfig {
    /// Builds a config; `spec.a` is set to `a`. Validity is checked separately.
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: f64, b: f64, xi: f64, beta: f64, rho: f64, mu: f64, gamma: f64, omega: f64) -> Self {
        BvpConfig {
            a,
            b,
            xi,
            beta,
            spec: PrabhakarSpec {
                rho,
                mu,
                gamma,
                omega,
                a,
                m: 3,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub spec_valid: bool,
    pub ordering: bool,
    pub beta_nonnegative: bool,
    /// `0 ≤ β(ξ-a)^{μ-1} < (μ-1)(b-a)^{μ-2}`; informational only.
    pub power_condition: bool,
    pub denominator_positive: bool,
    pub denominator: f64,
    pub valid: bool,
    pub problems: Vec<String>,
}

/// Checks every admissibility condition. The config is usable when the
/// parameters are valid, `a < ξ < b`, `β ≥ 0` and the denominator `D > 0`.
pub fn validate_config(cfg: &BvpConfig) -> ValidationReport {
    let mut problems = Vec::new();
    let spec_valid = match cfg.spec.validate() {
        Ok(()) if cfg.spec.a == cfg.a => true,
        Ok(()) => {
            problems.push(format!("spec.a = {} differs from a = {}", cfg.spec.a, cfg.a));
            false
        }
        Err(e) => {
            problems.push(e.to_string());
            false
        }
    };
    let finite = [cfg.a, cfg.b, cfg.xi, cfg.beta].iter().all(|v| v.is_finite());
    let ordering = finite && cfg.a < cfg.xi && cfg.xi < cfg.b;
    if !ordering {
        problems.push(format!("need a < xi < b, got a={}, xi={}, b={}", cfg.a, cfg.xi, cfg.b));
    }
    let beta_nonnegative = cfg.beta >= 0.0;
    if !beta_nonnegative {
        problems.push(format!("beta must be >= 0, got {}", cfg.beta));
    }
    let mu = cfg.spec.mu;
    let lhs = cfg.beta * (cfg.xi - cfg.a).powf(mu - 1.0);
    let power_condition = lhs >= 0.0 && lhs < (mu - 1.0) * (cfg.b - cfg.a).powf(mu - 2.0);

    let denominator = if spec_valid && ordering {
        GreensFunction::parts(cfg).map(|p| p.d).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let denominator_positive = denominator > 0.0;
    if spec_valid && ordering && !denominator_positive {
        problems.push(format!("denominator D = {denominator:e} is not positive"));
    }
    ValidationReport {
        spec_valid,
        ordering,
        beta_nonnegative,
        power_condition,
        denominator_positive,
        denominator,
        valid: spec_valid && ordering && beta_nonnegative && denominator_positive,
        problems,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    SLeT,
    TLeS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenEval {
    pub t: f64,
    pub s: f64,
    pub value: f64,
    pub branch: Branch,
}

/// Prepared evaluator for `G` and the quantities derived from it.
#[derive(Debug, Clone)]
pub struct GreensFunction {
    cfg: BvpConfig,
    e_mu: MittagLeffler,
    e_mu1: MittagLeffler,
    d0: f64,
    d: f64,
}

struct Parts {
    e_mu: MittagLeffler,
    e_mu1: MittagLeffler,
    d0: f64,
    d: f64,
}

impl GreensFunction {
    fn parts(cfg: &BvpConfig) -> Result<Parts> {
        let sp = &cfg.spec;
        let radius = (sp.omega.abs() * (cfg.b - cfg.a).powf(sp.rho)).max(MittagLeffler::DEFAULT_RADIUS);
        let e_mu = MittagLeffler::with_radius(sp.rho, sp.mu, sp.gamma, radius)?;
        let e_mu1 = MittagLeffler::with_radius(sp.rho, sp.mu - 1.0, sp.gamma, radius)?;
        let len = cfg.b - cfg.a;
        let d0 = len.powf(sp.mu - 2.0) * e_mu1.eval(sp.omega * len.powf(sp.rho));
        let r = cfg.xi - cfg.a;
        let d = d0 - cfg.beta * r.powf(sp.mu - 1.0) * e_mu.eval(sp.omega * r.powf(sp.rho));
        Ok(Parts { e_mu, e_mu1, d0, d })
    }

    pub fn new(cfg: &BvpConfig) -> Result<Self> {
        let report = validate_config(cfg);
        if !report.valid {
            return Err(Error::Config(report.problems.join("; ")));
        }
        let p = Self::parts(cfg)?;
        Ok(GreensFunction {
            cfg: *cfg,
            e_mu: p.e_mu,
            e_mu1: p.e_mu1,
            d0: p.d0,
            d: p.d,
        })
    }

    pub fn config(&self) -> &BvpConfig {
        &self.cfg
    }

    /// `D₀ = (b-a)^{μ-2} E^γ_{ρ,μ-1}(ω(b-a)^ρ)`.
    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// `D = D₀ - β φ(ξ)`.
    pub fn denominator(&self) -> f64 {
        self.d
    }

    /// `r^{μ-1} E^γ_{ρ,μ}(ω r^ρ)`; also `φ(t) = k(t-a)`.
    pub fn k(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let sp = &self.cfg.spec;
        r.powf(sp.mu - 1.0) * self.e_mu.eval(sp.omega * r.powf(sp.rho))
    }

    /// `ψ(r) = r^{μ-2} E^γ_{ρ,μ-1}(ω r^ρ) = k'(r)`; `B(s) = ψ(b-s)`.
    pub fn psi(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let sp = &self.cfg.spec;
        r.powf(sp.mu - 2.0) * self.e_mu1.eval(sp.omega * r.powf(sp.rho))
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.k(t - self.cfg.a)
    }

    pub fn b_factor(&self, s: f64) -> f64 {
        self.psi(self.cfg.b - s)
    }

    /// `Λ(t) = β φ(t) / D`.
    pub fn lambda(&self, t: f64) -> f64 {
        self.cfg.beta * self.phi(t) / self.d
    }

    /// `G` written in offsets `d = t - a`, `v = s - a`.
    pub fn eval_offsets(&self, d: f64, v: f64) -> f64 {
        let len = self.cfg.b - self.cfg.a;
        let first = self.k(d) * (self.psi(len - v) / self.d0);
        if v <= d {
            first - self.k(d - v)
        } else {
            first
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        self.eval_offsets(t - self.cfg.a, s - self.cfg.a)
    }

    pub fn eval_branch(&self, t: f64, s: f64) -> Result<GreenEval> {
        let (a, b) = (self.cfg.a, self.cfg.b);
        if !(a <= t && t <= b && a <= s && s <= b) {
            return Err(Error::Domain(format!("(t, s) = ({t}, {s}) outside [{a}, {b}]²")));
        }
        Ok(GreenEval {
            t,
            s,
            value: self.eval(t, s),
            branch: if s <= t { Branch::SLeT } else { Branch::TLeS },
        })
    }

    /// `(Λ_b, Λ_ξ) = (β φ(b) / D, β φ(ξ) / D)`.
    pub fn amplification_factors(&self) -> (f64, f64) {
        (self.lambda(self.cfg.b), self.lambda(self.cfg.xi))
    }
}

pub fn green_eval(t: f64, s: f64, cfg: &BvpConfig) -> Result<GreenEval> {
    GreensFunction::new(cfg)?.eval_branch(t, s)
}

pub fn amplification_factors(cfg: &BvpConfig) -> Result<(f64, f64)> {
    Ok(GreensFunction::new(cfg)?.amplification_factors())
}

/// Chebyshev-Lobatto points on `[a, b]`, ascending, endpoints included.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mut g: Vec<f64> = (0..n)
        .map(|i| {
            let c = (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            0.5 * (a + b) - 0.5 * (b - a) * c
        })
        .collect();
    g[0] = a;
    g[n - 1] = b;
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub property: &'static str,
    pub t: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub n_grid: usize,
    pub nonneg: bool,
    pub monotone: bool,
    pub bounds: bool,
    /// Smallest margin over all three checks; negative beyond the tolerance
    /// means a violation.
    pub worst_violation: Violation,
    pub branch_continuity: f64,
    pub power_ratio_holds: bool,
    pub power_ratio_min: f64,
    pub ml_ratio_failures: usize,
    pub ml_ratio_min: f64,
    /// Set when `ω < 0`: the checks are reported, not expected to hold.
    pub outside_positivity_regime: bool,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.nonneg && self.monotone && self.bounds
    }
}

/// Checks nonnegativity, monotonicity in `t` and `G(a,s) ≤ G(t,s) ≤ G(b,s)`
/// on an `n_grid × n_grid` Chebyshev-Lobatto grid, plus the two auxiliary
/// inequalities behind them.
pub fn green_property_check(cfg: &BvpConfig, n_grid: usize) -> Result<PropertyReport> {
    if n_grid < 16 {
        return Err(Error::Domain(format!("n_grid must be >= 16, got {n_grid}")));
    }
    let g = GreensFunction::new(cfg)?;
    let grid = chebyshev_grid(cfg.a, cfg.b, n_grid);
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| grid.iter().map(|&s| g.eval(t, s)).collect())
        .collect();

    let mut worst = Violation {
        property: "nonneg",
        t: cfg.a,
        s: cfg.a,
        value: f64::INFINITY,
    };
    let mut note = |property: &'static str, t: f64, s: f64, value: f64| {
        if value < worst.value {
            worst = Violation { property, t, s, value };
        }
    };
    let (mut min_g, mut min_dt, mut min_bound) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let last = n_grid - 1;
    for (i, &t) in grid.iter().enumerate() {
        for (j, &s) in grid.iter().enumerate() {
            let v = rows[i][j];
            min_g = min_g.min(v);
            note("nonneg", t, s, v);
            if i + 1 < n_grid {
                let dt = rows[i + 1][j] - v;
                min_dt = min_dt.min(dt);
                note("monotone", t, s, dt);
            }
            let margin = (v - rows[0][j]).min(rows[last][j] - v);
            min_bound = min_bound.min(margin);
            note("bounds", t, s, margin);
        }
    }

    let sp = &cfg.spec;
    let len = cfg.b - cfg.a;
    let ml_b = g.e_mu1.eval(sp.omega * len.powf(sp.rho));
    let mut branch_continuity: f64 = 0.0;
    let mut power_min = f64::INFINITY;
    let mut ml_min = f64::INFINITY;
    let mut ml_failures = 0;
    for &t in &grid {
        // the subtracted term vanishes on the diagonal
        let upper = g.phi(t) * g.b_factor(t) / g.d0;
        branch_continuity = branch_continuity.max((g.eval(t, t) - upper).abs());
        for &s in grid.iter().filter(|&&s| s <= t) {
            let p = (t - cfg.a).powf(sp.mu - 1.0) * (cfg.b - s).powf(sp.mu - 2.0) * len.powf(2.0 - sp.mu)
                - (t - s).powf(sp.mu - 1.0);
            power_min = power_min.min(p);
            let m = g.e_mu.eval(sp.omega * (t - cfg.a).powf(sp.rho))
                * g.e_mu1.eval(sp.omega * (cfg.b - s).powf(sp.rho))
                / ml_b
                - g.e_mu.eval(sp.omega * (t - s).powf(sp.rho));
            ml_min = ml_min.min(m);
            if m < -PROPERTY_TOLERANCE {
                ml_failures += 1;
            }
        }
    }
    let scale = len.powf(sp.mu - 1.0);
    Ok(PropertyReport {
        n_grid,
        nonneg: min_g >= -PROPERTY_TOLERANCE,
        monotone: min_dt >= -PROPERTY_TOLERANCE,
        bounds: min_bound >= -PROPERTY_TOLERANCE,
        worst_violation: worst,
        branch_continuity,
        power_ratio_holds: power_min >= -PROPERTY_TOLERANCE * scale,
        power_ratio_min: power_min,
        ml_ratio_failures: ml_failures,
        ml_ratio_min: ml_min,
        outside_positivity_regime: sp.omega < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;

    fn cfg(beta: f64, mu: f64, g: f64, w: f64) -> BvpConfig {
        BvpConfig::new(0.0, 1.0, 0.5, beta, 1.0, mu, g, w)
    }

    #[test]
    fn validation_examples() {
        let r = validate_config(&cfg(0.0, 2.5, 0.3, 0.0));
        assert!(r.valid);
        assert_relative_eq!(r.denominator, 1.0 / gamma(1.5), max_relative = 1e-14);

        let mut bad = cfg(0.0, 2.5, 0.0, 0.0);
        bad.xi = 1.0;
        let r = validate_config(&bad);
        assert!(!r.valid && !r.ordering);

        let r = validate_config(&cfg(-0.1, 2.5, 0.0, 0.0));
        assert!(!r.valid && !r.beta_nonnegative);
    }

    #[test]
    fn denominator_threshold_in_beta() {
        // D = 1/Γ(1.5) - β 0.5^{1.5}/Γ(2.5) vanishes at β* = Γ(2.5)/(Γ(1.5) 0.5^{1.5})
        let star = gamma(2.5) / (gamma(1.5) * 0.5f64.powf(1.5));
        assert!(validate_config(&cfg(star * (1.0 - 1e-9), 2.5, 0.0, 0.0)).valid);
        let r = validate_config(&cfg(star * (1.0 + 1e-9), 2.5, 0.0, 0.0));
        assert!(!r.valid && !r.denominator_positive);
        // find the same threshold by bisection on the report
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if validate_config(&cfg(mid, 2.5, 0.0, 0.0)).valid {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_relative_eq!(lo, star, max_relative = 1e-12);
    }

    #[test]
    fn green_examples() {
        let c = cfg(0.2, 2.6, 0.7, 0.4);
        let g = GreensFunction::new(&c).unwrap();
        assert_eq!(g.eval(0.0, 0.3), 0.0);
        assert!(g.eval(1.0, 1.0).abs() < 1e-15);
        let e = green_eval(0.3, 0.6, &c).unwrap();
        assert_eq!(e.branch, Branch::TLeS);
        assert_eq!(green_eval(0.6, 0.6, &c).unwrap().branch, Branch::SLeT);
        assert!(green_eval(1.2, 0.6, &c).is_err());
        assert!(green_eval(0.5, 0.5, &cfg(-1.0, 2.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_zero_reduction() {
        let c = BvpConfig::new(1.0, 2.5, 2.0, 0.3, 0.8, 2.3, 0.0, 0.9);
        let g = GreensFunction::new(&c).unwrap();
        for s in chebyshev_grid(1.0, 2.5, 40) {
            let lhs = gamma(2.3) * g.eval(2.5, s);
            let rhs = (2.5 - s).powf(0.3) * (s - 1.0);
            assert!((lhs - rhs).abs() < 1e-13, "s={s}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn amplification_examples() {
        let (lb, lx) = amplification_factors(&cfg(0.0, 2.5, 0.5, 0.5)).unwrap();
        assert_eq!((lb, lx), (0.0, 0.0));
        // γ = ω = 0: D = 1/Γ(1.5) - 0.1·0.5^{1.5}/Γ(2.5)
        let d = 1.0 / gamma(1.5) - 0.1 * 0.5f64.powf(1.5) / gamma(2.5);
        let (lb, lx) = amplification_factors(&cfg(0.1, 2.5, 0.0, 0.0)).unwrap();
        assert_relative_eq!(lb, 0.1 / gamma(2.5) / d, max_relative = 1e-14);
        assert_relative_eq!(lx, 0.1 * 0.5f64.powf(1.5) / gamma(2.5) / d, max_relative = 1e-14);
        let (lb, lx) = amplification_factors(&cfg(0.3, 2.4, 0.6, 0.4)).unwrap();
        assert!(lb >= lx && lx >= 0.0);
    }

    #[test]
    fn xi_does_not_enter_g_when_beta_is_zero() {
        let mut c = cfg(0.0, 2.7, 0.5, 0.3);
        let g1 = GreensFunction::new(&c).unwrap();
        c.xi = 0.9;
        let g2 = GreensFunction::new(&c).unwrap();
        for (t, s) in [(0.2, 0.7), (0.8, 0.1), (0.5, 0.5)] {
            assert_eq!(g1.eval(t, s), g2.eval(t, s));
        }
    }

    #[test]
    fn properties_hold_for_rl_case() {
        let r = green_property_check(&cfg(0.1, 2.5, 0.0, 0.0), 64).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert!(r.power_ratio_holds);
        assert!(r.branch_continuity <= 1e-15);
        assert!(green_property_check(&cfg(0.1, 2.5, 0.0, 0.0), 8).is_err());
    }
}
