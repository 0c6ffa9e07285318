//! The acceptance suite: eleven numbered checks behind a common trait,
//! looked up by id or name and run against a shared [`Context`].
//!
//! Outcomes contain only computed numbers and verdicts (no timings), so the
//! rendered summary is byte-for-byte reproducible.

use std::sync::OnceLock;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::func::{MlPowerSum, PowerSum, ScalarFn};
use crate::green::{chebyshev_grid, green_property_check, BvpConfig, GreensFunction};
use crate::inequality::{
    certify, classical_hartman_wintner_check, classical_lyapunov_check, lhs_integral, rhs_bounds, InequalityReport,
    Provenance, MARGIN_TOLERANCE,
};
use crate::json::{self, SCHEMA};
use crate::nystrom::{build_operator, spectral_scale, ResidualReport, BC_A_TOL, BC_B_TOL};
use crate::prabhakar::{power_law_oracle, prabhakar_derivative, prabhakar_integral, PrabhakarSpec};
use crate::quadrature::gauss_jacobi;
use crate::special::{gamma, ml3, recip_gamma, MlParams};
use crate::{Error, Result};

const SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Measurement {
    pub fn at_most(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Measurement {
            label: label.into(),
            value,
            threshold,
            relation: Relation::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Measurement {
            label: label.into(),
            value,
            threshold,
            relation: Relation::AtLeast,
            pass: value >= threshold,
        }
    }
}

/// A reported number that does not affect the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Note {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<Note>,
    pub errors: Vec<String>,
}

impl Outcome {
    /// One-line human summary.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let worst = self
            .measurements
            .iter()
            .find(|m| !m.pass)
            .or(self.measurements.first())
            .map(|m| {
                let rel = match m.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                };
                format!("{} = {:.3e} ({rel} {:.1e})", m.label, m.value, m.threshold)
            })
            .unwrap_or_default();
        let err = self.errors.first().map(|e| format!(" error: {e}")).unwrap_or_default();
        format!("criterion {:>2} {:<30} {verdict}  {worst}{err}", self.id, self.name)
    }
}

/// Collects measurements and errors while a criterion runs.
#[derive(Default)]
struct Recorder {
    measurements: Vec<Measurement>,
    notes: Vec<Note>,
    errors: Vec<String>,
}

impl Recorder {
    fn at_most(&mut self, label: &str, value: f64, threshold: f64) {
        self.measurements.push(Measurement::at_most(label, value, threshold));
    }

    fn at_least(&mut self, label: &str, value: f64, threshold: f64) {
        self.measurements.push(Measurement::at_least(label, value, threshold));
    }

    fn note(&mut self, label: &str, value: f64) {
        self.notes.push(Note {
            label: label.into(),
            value,
        });
    }

    fn error(&mut self, context: &str, e: impl std::fmt::Display) {
        self.errors.push(format!("{context}: {e}"));
    }

    /// Records the error for `Err` and yields `NaN`, which fails any bound.
    fn value(&mut self, context: &str, r: Result<f64>) -> f64 {
        r.unwrap_or_else(|e| {
            self.error(context, e);
            f64::NAN
        })
    }

    fn finish(self, c: &dyn Criterion) -> Outcome {
        Outcome {
            id: c.id(),
            name: c.name(),
            pass: self.errors.is_empty() && self.measurements.iter().all(|m| m.pass),
            measurements: self.measurements,
            notes: self.notes,
            errors: self.errors,
        }
    }
}

/// `max` that propagates `NaN`, so a failed evaluation cannot hide.
fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

fn rel_err(value: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        value.abs()
    } else {
        ((value - exact) / exact).abs()
    }
}

pub trait Criterion: Sync {
    fn id(&self) -> u32;
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &Context) -> Outcome;
}

/// Everything a batch of criteria may share.
#[derive(Default)]
pub struct Context {
    sweep: OnceLock<Vec<std::result::Result<SweepInstance, String>>>,
    baseline: OnceLock<String>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// Spectral-scaled instances for every sweep configuration, built once.
    fn sweep(&self) -> &[std::result::Result<SweepInstance, String>] {
        self.sweep.get_or_init(|| {
            sweep_configs()
                .into_par_iter()
                .map(|cfg| SweepInstance::build(cfg).map_err(|e| e.to_string()))
                .collect()
        })
    }
}

pub fn registry() -> Vec<Box<dyn Criterion>> {
    vec![
        Box::new(MlReductions),
        Box::new(IntegralOracle),
        Box::new(Roundtrip),
        Box::new(NullSpace),
        Box::new(GreenGammaZero),
        Box::new(GreenProperties),
        Box::new(ManufacturedCertification),
        Box::new(RiemannLiouvilleCase),
        Box::new(ClassicalOracles),
        Box::new(MeshConvergence),
        Box::new(Determinism),
    ]
}

/// Looks a criterion up by number or name.
pub fn find(key: &str) -> Option<Box<dyn Criterion>> {
    registry()
        .into_iter()
        .find(|c| c.name() == key || key.parse::<u32>().ok() == Some(c.id()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub criteria: Vec<Outcome>,
    pub all_pass: bool,
}

impl Summary {
    fn new(criteria: Vec<Outcome>) -> Self {
        Summary {
            schema: SCHEMA,
            all_pass: criteria.iter().all(|o| o.pass),
            criteria,
        }
    }

    pub fn to_json(&self) -> String {
        json::to_pretty(self)
    }
}

/// Runs the whole registry in order. The determinism check compares a
/// fresh rerun against the outcomes produced here.
pub fn run_suite(ctx: &Context) -> Summary {
    let mut outcomes = Vec::new();
    for c in registry() {
        if c.id() == DETERMINISM_ID {
            let _ = ctx.baseline.set(json::to_compact(&outcomes));
        }
        outcomes.push(c.run(ctx));
    }
    Summary::new(outcomes)
}

/// Runs the selected criteria (by id) in registry order.
pub fn run_selected(ctx: &Context, ids: &[u32]) -> Summary {
    Summary::new(
        registry()
            .into_iter()
            .filter(|c| ids.contains(&c.id()))
            .map(|c| c.run(ctx))
            .collect(),
    )
}

fn run_numbered(ctx: &Context) -> Vec<Outcome> {
    registry()
        .into_iter()
        .filter(|c| c.id() != DETERMINISM_ID)
        .map(|c| c.run(ctx))
        .collect()
}

// ---------------------------------------------------------------------------

struct MlReductions;

impl Criterion for MlReductions {
    fn id(&self) -> u32 {
        1
    }

    fn name(&self) -> &'static str {
        "ml-reductions"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let ml = |rho, mu, g, z| ml3(&MlParams::new(rho, mu, g, z)?).map(|v| v.value);

        let exp_err = worst((0..=200).map(|k| {
            let z = -10.0 + 0.1 * k as f64;
            let r = ml(1.0, 1.0, 1.0, z).map(|v| rel_err(v, z.exp()));
            rec.value("exp", r)
        }));
        rec.at_most("exp max relative error", exp_err, 1e-12);

        let cosh_err = worst((0..=200).map(|k| {
            let x = 0.025 * k as f64;
            let r = ml(2.0, 1.0, 1.0, x * x).map(|v| rel_err(v, x.cosh()));
            rec.value("cosh", r)
        }));
        rec.at_most("cosh max relative error", cosh_err, 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let gz_err = worst((0..50).map(|_| {
            let rho = rng.random_range(0.2..3.0);
            let mu = rng.random_range(0.1..6.0);
            let z = rng.random_range(-20.0..20.0);
            let r = ml(rho, mu, 0.0, z).map(|v| rel_err(v, recip_gamma(mu)));
            rec.value("gamma = 0", r)
        }));
        rec.at_most("gamma=0 max relative error", gz_err, 1e-14);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct IntegralOracle;

const ORACLE_A: f64 = 0.25;
const ORACLE_SPAN: f64 = 1.3;

impl Criterion for IntegralOracle {
    fn id(&self) -> u32 {
        2
    }

    fn name(&self) -> &'static str {
        "integral-oracle"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let mut grid = Vec::new();
        for rho in [0.5, 1.0, 1.5] {
            for mu in [2.2, 2.5, 2.9] {
                for g in [0.0, 0.5, 1.0] {
                    for w in [-0.5, 0.0, 0.5] {
                        for nu in [1.0, 1.5, 2.0] {
                            grid.push((rho, mu, g, w, nu));
                        }
                    }
                }
            }
        }
        let x = ORACLE_A + ORACLE_SPAN;
        let errs: Vec<Result<f64>> = grid
            .par_iter()
            .map(|&(rho, mu, g, w, nu)| {
                let spec = PrabhakarSpec::new(rho, mu, g, w, ORACLE_A)?;
                let f = PowerSum::new(ORACLE_A, vec![(1.0, nu - 1.0)])?;
                let quad = prabhakar_integral(&f, x, &spec, mu)?.value;
                Ok(rel_err(quad, power_law_oracle(nu, x, &spec, mu)?))
            })
            .collect();
        let max = worst(errs.into_iter().map(|r| rec.value("grid point", r)));
        rec.note("grid points", grid.len() as f64);
        rec.at_most("max relative error", max, 1e-8);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct Roundtrip;

/// `(ρ, μ, γ, ω)`.
type OperatorParams = (f64, f64, f64, f64);

/// Polynomials in `(s-a)` and the operator each is pushed through.
const ROUNDTRIP_CASES: [(&str, OperatorParams); 5] = [
    ("1", (1.0, 2.5, 0.5, 0.3)),
    ("1 + 2*(s-a)", (0.5, 2.2, 1.0, 0.0)),
    ("2 - (s-a) + 3*(s-a)^2", (1.5, 2.9, 0.7, -0.4)),
    ("1 + (s-a)^3 - 0.5*(s-a)^4", (2.0, 2.7, 0.0, 0.5)),
    ("0.5 + (s-a) + (s-a)^2 + (s-a)^3", (1.0, 3.0, 0.5, 0.5)),
];

impl Criterion for Roundtrip {
    fn id(&self) -> u32 {
        3
    }

    fn name(&self) -> &'static str {
        "integral-derivative-roundtrip"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let a = 0.0;
        let points: Vec<(usize, f64)> = (0..ROUNDTRIP_CASES.len())
            .flat_map(|c| (1..=10).map(move |k| (c, a + 0.095 * k as f64)))
            .collect();
        let errs: Vec<Result<f64>> = points
            .par_iter()
            .map(|&(c, x)| {
                let (expr, (rho, mu, g, w)) = ROUNDTRIP_CASES[c];
                let spec = PrabhakarSpec::new(rho, mu, g, w, a)?;
                let f = PowerSum::parse(expr, a)?;
                let image = f.prabhakar_integral(rho, w, g, mu)?;
                let back = prabhakar_derivative(&image, x, &spec)?.value;
                Ok(rel_err(back, f.eval(x)))
            })
            .collect();
        let max = worst(errs.into_iter().map(|r| rec.value("roundtrip", r)));
        rec.at_most("max relative error", max, 1e-5);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct NullSpace;

impl Criterion for NullSpace {
    fn id(&self) -> u32 {
        4
    }

    fn name(&self) -> &'static str {
        "derivative-null-space"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let a = 0.0;
        let mut cases = Vec::new();
        for &(rho, mu, g, w) in &[(1.0, 2.5, 0.5, 0.3), (0.5, 2.2, 1.0, 0.0)] {
            for j in 1..=3 {
                for k in 0..8 {
                    cases.push((rho, mu, g, w, j, a + 0.1 + 0.85 * k as f64 / 7.0));
                }
            }
        }
        let errs: Vec<Result<f64>> = cases
            .par_iter()
            .map(|&(rho, mu, g, w, j, t)| {
                let spec = PrabhakarSpec::new(rho, mu, g, w, a)?;
                let f = MlPowerSum::single(a, rho, w, mu - j as f64 + 1.0, g)?;
                Ok(prabhakar_derivative(&f, t, &spec)?.value.abs())
            })
            .collect();
        let max = worst(errs.into_iter().map(|r| rec.value("kernel function", r)));
        rec.at_most("max absolute derivative", max, 1e-4);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct GreenGammaZero;

impl Criterion for GreenGammaZero {
    fn id(&self) -> u32 {
        5
    }

    fn name(&self) -> &'static str {
        "green-gamma-zero"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let configs = [
            BvpConfig::new(0.0, 1.0, 0.5, 0.0, 1.0, 2.5, 0.0, 0.0),
            BvpConfig::new(0.0, 1.0, 0.3, 0.2, 0.5, 2.2, 0.0, 0.7),
            BvpConfig::new(-1.0, 1.0, 0.0, 0.1, 1.5, 2.9, 0.0, -0.4),
            BvpConfig::new(1.0, 2.5, 2.0, 0.3, 2.0, 3.0, 0.0, 1.0),
        ];
        let mut max = 0.0f64;
        for cfg in &configs {
            let dev = GreensFunction::new(cfg).map(|g| {
                let mu = cfg.spec.mu;
                worst(chebyshev_grid(cfg.a, cfg.b, 200).into_iter().map(|s| {
                    let reduced = (cfg.b - s).powf(mu - 2.0) * (s - cfg.a);
                    (gamma(mu) * g.eval(cfg.b, s) - reduced).abs()
                }))
            });
            max = worst([max, rec.value("green", dev)]);
        }
        rec.at_most("max absolute deviation", max, 1e-10);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct GreenProperties;

/// `(a, b, ξ, β, ρ, μ, γ, ω)`.
pub type ConfigTuple = (f64, f64, f64, f64, f64, f64, f64, f64);

/// Configurations with `ω ≥ 0` for which the positivity properties were
/// established on a fine grid.
pub const PROPERTY_CONFIGS: [ConfigTuple; 8] = [
    (0.0, 1.0, 0.5, 0.1, 1.0, 2.5, 0.5, 0.5),
    (0.0, 1.0, 0.4, 0.05, 0.5, 2.2, 1.0, 0.3),
    (0.0, 1.0, 0.5, 0.0, 1.0, 2.9, 1.0, 0.0),
    (0.0, 2.0, 1.0, 0.2, 1.0, 2.5, 1.0, 0.5),
    (1.0, 1.5, 1.25, 0.1, 2.0, 2.9, 2.0, 2.0),
    (0.0, 1.0, 0.6, 0.1, 2.0, 3.0, 0.5, 0.5),
    (0.0, 1.0, 0.5, 0.3, 0.5, 2.5, 0.0, 1.0),
    (-1.0, 1.0, 0.0, 0.05, 1.5, 2.7, 0.7, 0.2),
];

impl Criterion for GreenProperties {
    fn id(&self) -> u32 {
        6
    }

    fn name(&self) -> &'static str {
        "green-properties"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let reports: Vec<_> = PROPERTY_CONFIGS
            .iter()
            .map(|&(a, b, xi, beta, rho, mu, g, w)| {
                green_property_check(&BvpConfig::new(a, b, xi, beta, rho, mu, g, w), 200)
            })
            .collect();
        let mut failing = 0usize;
        let mut margin = f64::INFINITY;
        for r in reports {
            match r {
                Ok(r) => {
                    failing += usize::from(!r.all_hold());
                    margin = margin.min(r.worst_violation.value);
                }
                Err(e) => {
                    rec.error("property check", e);
                    failing += 1;
                }
            }
        }
        rec.at_most("configurations violating", failing as f64, 0.0);
        rec.at_least("smallest property margin", margin, -1e-12);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

/// Nyström size for manufactured instances and the mesh comparison.
const SWEEP_N: usize = 400;
const SWEEP_N_COARSE: usize = 200;

/// The 48-point sweep on `[0, 1]` with `ξ` at the midpoint.
pub fn sweep_configs() -> Vec<BvpConfig> {
    let mut out = Vec::with_capacity(48);
    for rho in [0.5, 1.0] {
        for mu in [2.2, 2.5, 2.9] {
            for g in [0.0, 0.5] {
                for w in [0.0, 0.3] {
                    for beta in [0.0, 0.05] {
                        out.push(BvpConfig::new(0.0, 1.0, 0.5, beta, rho, mu, g, w));
                    }
                }
            }
        }
    }
    out
}

/// The smooth base potential used across the sweep.
pub fn sweep_q(s: f64) -> f64 {
    1.0 + s
}

struct SweepInstance {
    cfg: BvpConfig,
    lambda_star: f64,
    residuals: ResidualReport,
    report: InequalityReport,
}

impl SweepInstance {
    fn build(cfg: BvpConfig) -> Result<Self> {
        let op = build_operator(&cfg, &sweep_q, SWEEP_N)?;
        let sc = spectral_scale(&op)?;
        let lambda = sc.lambda_star;
        let residuals = op.scaled(1.0 / lambda).verify(&sc.x_star)?;
        let scaled_q = move |s: f64| sweep_q(s) / lambda;
        let report = certify(&cfg, &scaled_q, Provenance::SpectralScaled)?;
        Ok(SweepInstance {
            cfg,
            lambda_star: lambda,
            residuals,
            report,
        })
    }
}

struct ManufacturedCertification;

impl Criterion for ManufacturedCertification {
    fn id(&self) -> u32 {
        7
    }

    fn name(&self) -> &'static str {
        "manufactured-certification"
    }

    fn run(&self, ctx: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let mut failing = 0usize;
        let mut stated = 0usize;
        let (mut margin, mut x_a, mut dx_a, mut bc_b, mut integral) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let sweep = ctx.sweep();
        for inst in sweep {
            match inst {
                Ok(i) => {
                    failing += usize::from(!i.report.holds_proof);
                    stated += usize::from(i.report.holds_stated);
                    margin = margin.min(i.report.margin_proof);
                    x_a = worst([x_a, i.residuals.x_a]);
                    dx_a = worst([dx_a, i.residuals.dx_a]);
                    bc_b = worst([bc_b, i.residuals.bc_b]);
                    integral = worst([integral, i.residuals.integral_residual]);
                }
                Err(e) => {
                    rec.error("instance", e);
                    failing += 1;
                }
            }
        }
        rec.at_most("instances failing the proof bound", failing as f64, 0.0);
        rec.at_least("smallest proof margin", margin, MARGIN_TOLERANCE);
        rec.at_most("max |x(a)|", x_a, BC_A_TOL);
        rec.at_most("max |x'(a)|", dx_a, BC_A_TOL);
        rec.at_most("max |x'(b) - beta x(xi)|", bc_b, BC_B_TOL);
        rec.note("instances", sweep.len() as f64);
        rec.note("instances satisfying the stated bound", stated as f64);
        rec.note("max integral-equation residual", integral);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct RiemannLiouvilleCase;

impl Criterion for RiemannLiouvilleCase {
    fn id(&self) -> u32 {
        8
    }

    fn name(&self) -> &'static str {
        "riemann-liouville-case"
    }

    fn run(&self, _: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
        let (mut rhs_err, mut lhs_err) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let a: f64 = rng.random_range(-1.0..1.0);
            let len: f64 = rng.random_range(0.5..2.0);
            let b = a + len;
            let xi = a + len * rng.random_range(0.1..0.9);
            let mu: f64 = rng.random_range(2.05..3.0);
            let rho = rng.random_range(0.3..2.0);
            let beta_max = (mu - 1.0) * len.powf(mu - 2.0) / (xi - a).powf(mu - 1.0);
            let beta = rng.random_range(0.0..0.9) * beta_max;
            // |c1| < c0 keeps q positive, so |q| has no kink for the rules to resolve
            let (c0, c1, c2) = (
                rng.random_range(0.5..2.0),
                rng.random_range(-0.45..0.45),
                rng.random_range(0.0..3.0),
            );
            let q = move |s: f64| c0 + c1 * (2.0 * s).sin() + c2 * (s - a) * (s - a);
            let cfg = BvpConfig::new(a, b, xi, beta, rho, mu, 0.0, 0.0);

            let direct_rhs = 1.0
                / (1.0
                    + beta * len.powf(mu - 1.0) / ((mu - 1.0) * len.powf(mu - 2.0) - beta * (xi - a).powf(mu - 1.0)))
                * gamma(mu);
            let ours = rhs_bounds(&cfg).map(|(_, proof)| rel_err(gamma(mu) * proof, direct_rhs));
            rhs_err = worst([rhs_err, rec.value("rhs", ours)]);

            // ∫ (b-s)^{μ-2} (s-a) |q(s)| ds with the Jacobi weight taking the singular factor
            let rule = gauss_jacobi(60, mu - 2.0, 1.0);
            let h = 0.5 * len;
            let direct_lhs = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * q(a + h * (1.0 + x)).abs())
                .sum::<f64>()
                * h.powf(mu);
            let ours = lhs_integral(&cfg, &q).map(|v| rel_err(gamma(mu) * v, direct_lhs));
            lhs_err = worst([lhs_err, rec.value("lhs", ours)]);
        }
        rec.at_most("max relative error, bound", rhs_err, 1e-9);
        rec.at_most("max relative error, integral", lhs_err, 1e-9);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct ClassicalOracles;

impl Criterion for ClassicalOracles {
    fn id(&self) -> u32 {
        9
    }

    fn name(&self) -> &'static str {
        "classical-oracles"
    }

    fn run(&self, _: &Context) -> Outcome {
        use std::f64::consts::PI;
        let mut rec = Recorder::default();
        let pi2 = PI * PI;
        let l = classical_lyapunov_check(0.0, 1.0, &|_: f64| pi2);
        rec.at_most("lyapunov integral relative error", rel_err(l.integral, pi2), 1e-12);
        rec.at_least("lyapunov excess over 4/(b-a)", l.integral - l.bound, f64::MIN_POSITIVE);
        let l2 = classical_lyapunov_check(0.0, 2.0, &|_: f64| pi2 / 4.0);
        rec.at_most(
            "lyapunov on [0,2] relative error",
            rel_err(l2.integral, pi2 / 2.0),
            1e-12,
        );
        rec.at_least("lyapunov on [0,2] excess", l2.integral - l2.bound, f64::MIN_POSITIVE);
        let h = classical_hartman_wintner_check(0.0, 1.0, &|_: f64| pi2);
        rec.at_most(
            "hartman-wintner integral relative error",
            rel_err(h.integral, pi2 / 6.0),
            1e-12,
        );
        rec.at_least(
            "hartman-wintner excess over b-a",
            h.integral - h.bound,
            f64::MIN_POSITIVE,
        );
        rec.at_most("midpoint maximum identity error", h.max_identity_error, 1e-15);
        rec.note("lyapunov integral", l.integral);
        rec.note("hartman-wintner integral", h.integral);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct MeshConvergence;

impl Criterion for MeshConvergence {
    fn id(&self) -> u32 {
        10
    }

    fn name(&self) -> &'static str {
        "mesh-convergence"
    }

    fn run(&self, ctx: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let changes: Vec<Result<f64>> = ctx
            .sweep()
            .par_iter()
            .map(|inst| {
                let inst = inst.as_ref().map_err(|e| Error::Domain(e.clone()))?;
                let coarse = spectral_scale(&build_operator(&inst.cfg, &sweep_q, SWEEP_N_COARSE)?)?;
                Ok(rel_err(coarse.lambda_star, inst.lambda_star))
            })
            .collect();
        let max = worst(changes.into_iter().map(|r| rec.value("eigenvalue", r)));
        rec.at_most("max relative change n=200 to n=400", max, 1e-6);
        rec.finish(self)
    }
}

// ---------------------------------------------------------------------------

struct Determinism;

const DETERMINISM_ID: u32 = 11;

impl Criterion for Determinism {
    fn id(&self) -> u32 {
        DETERMINISM_ID
    }

    fn name(&self) -> &'static str {
        "determinism"
    }

    fn run(&self, ctx: &Context) -> Outcome {
        let mut rec = Recorder::default();
        let first = match ctx.baseline.get() {
            Some(s) => s.clone(),
            None => json::to_compact(&run_numbered(&Context::new())),
        };
        let second = json::to_compact(&run_numbered(&Context::new()));
        let differing =
            first.bytes().zip(second.bytes()).filter(|(x, y)| x != y).count() + first.len().abs_diff(second.len());
        rec.at_most("differing bytes between runs", differing as f64, 0.0);
        rec.note("summary bytes", first.len() as f64);
        rec.finish(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_numbered_in_order() {
        let ids: Vec<u32> = registry().iter().map(|c| c.id()).collect();
        assert_eq!(ids, (1..=11).collect::<Vec<_>>());
        assert_eq!(find("9").unwrap().name(), "classical-oracles");
        assert_eq!(find("green-gamma-zero").unwrap().id(), 5);
        assert!(find("nope").is_none());
    }

    #[test]
    fn sweep_has_48_configs() {
        let s = sweep_configs();
        assert_eq!(s.len(), 48);
        assert!(s.iter().all(|c| c.xi == 0.5 * (c.a + c.b)));
    }

    #[test]
    fn cheap_criteria_pass() {
        let summary = run_selected(&Context::new(), &[1, 5, 9]);
        assert_eq!(summary.criteria.len(), 3);
        for o in &summary.criteria {
            assert!(o.pass, "{}", o.line());
        }
    }

    #[test]
    fn nan_measurements_fail() {
        assert!(!Measurement::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Measurement::at_least("x", f64::NAN, 1.0).pass);
        assert!(worst([1.0, f64::NAN, 0.5]).is_nan());
    }
}
