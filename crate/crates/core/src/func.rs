//! Real functions on `[a, b]`: plain closures, sampled grids, and the
//! closed-form families `Σ c (u-a)^p` and `Σ c (u-a)^{ν-1} E^δ_{ρ,ν}(ω(u-a)^ρ)`
//! on which the Prabhakar operators act exactly.

use serde::Serialize;

use crate::special::{gamma, MittagLeffler};
use crate::{Error, Result};

/// A real function of one variable.
///
/// `endpoint_exponents` lists the exponents `β` of the leading terms
/// `(u-a)^β` near the base point, so quadrature can absorb them. Smooth
/// functions keep the default `[0]`.
pub trait ScalarFn: Sync {
    fn eval(&self, u: f64) -> f64;

    fn endpoint_exponents(&self) -> Vec<f64> {
        vec![0.0]
    }
}

impl<F: Fn(f64) -> f64 + Sync> ScalarFn for F {
    fn eval(&self, u: f64) -> f64 {
        self(u)
    }
}

/// Attaches endpoint exponents to an arbitrary closure.
pub struct WithExponents<F> {
    pub f: F,
    pub exponents: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> ScalarFn for WithExponents<F> {
    fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    fn endpoint_exponents(&self) -> Vec<f64> {
        self.exponents.clone()
    }
}

/// Samples of a function on strictly increasing nodes.
///
/// Evaluation between nodes uses local cubic Lagrange interpolation
/// (linear when fewer than four nodes); outside the node range the end
/// value is held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::Domain("grid function needs at least one node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::Domain(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Domain("grid function has non-finite entries".into()));
        }
        Ok(GridFunction { nodes, values })
    }

    pub fn sample(nodes: Vec<f64>, f: &dyn ScalarFn) -> Result<Self> {
        let values = nodes.iter().map(|&t| f.eval(t)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n == 1 || x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|&t| t <= x) - 1;
        if n < 4 {
            let (t0, t1) = (self.nodes[i], self.nodes[i + 1]);
            let w = (x - t0) / (t1 - t0);
            return self.values[i] * (1.0 - w) + self.values[i + 1] * w;
        }
        let lo = i.saturating_sub(1).min(n - 4);
        let ts = &self.nodes[lo..lo + 4];
        let vs = &self.values[lo..lo + 4];
        let mut sum = 0.0;
        for j in 0..4 {
            let mut l = 1.0;
            for k in 0..4 {
                if k != j {
                    l *= (x - ts[k]) / (ts[j] - ts[k]);
                }
            }
            sum += l * vs[j];
        }
        sum
    }
}

impl ScalarFn for GridFunction {
    fn eval(&self, u: f64) -> f64 {
        self.interpolate(u)
    }
}

/// `Σ c_i (u-a)^{p_i}`, zero to the left of `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSum {
    pub a: f64,
    pub terms: Vec<(f64, f64)>,
}

impl PowerSum {
    pub fn new(a: f64, terms: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&(c, p)) = terms
            .iter()
            .find(|(c, p)| !c.is_finite() || !p.is_finite() || *p <= -1.0)
        {
            return Err(Error::Domain(format!(
                "power term {c}*(s-a)^{p} must have finite c and p > -1"
            )));
        }
        Ok(PowerSum { a, terms })
    }

    pub fn constant(a: f64, c: f64) -> Self {
        PowerSum {
            a,
            terms: vec![(c, 0.0)],
        }
    }

    /// Parses expressions such as `1 + 2.5*(s-a)^1.5 - (s-a)`.
    ///
    /// Each term is `[c][*](s-a)[^p]` or a bare number; the variable may be
    /// any of `s t u x`.
    pub fn parse(expr: &str, a: f64) -> Result<Self> {
        let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Domain("empty expression".into()));
        }
        let mut terms = Vec::new();
        for (sign, body) in split_terms(&compact)? {
            let (c, p) = parse_term(body)?;
            terms.push((sign * c, p));
        }
        Self::new(a, terms)
    }

    /// Exact image under the Prabhakar integral of order `mu_eff`.
    pub fn prabhakar_integral(&self, rho: f64, omega: f64, gamma_: f64, mu_eff: f64) -> Result<MlPowerSum> {
        self.as_ml(rho, omega)?.prabhakar_integral(gamma_, mu_eff)
    }

    /// The same function written as an [`MlPowerSum`] with `δ = 0`.
    pub fn as_ml(&self, rho: f64, omega: f64) -> Result<MlPowerSum> {
        let terms = self
            .terms
            .iter()
            .map(|&(c, p)| MlTerm::new(c * gamma(p + 1.0), p + 1.0, 0.0, rho))
            .collect::<Result<Vec<_>>>()?;
        Ok(MlPowerSum {
            a: self.a,
            rho,
            omega,
            terms,
        })
    }
}

impl ScalarFn for PowerSum {
    fn eval(&self, u: f64) -> f64 {
        let r = u - self.a;
        self.terms
            .iter()
            .map(|&(c, p)| {
                if p == 0.0 {
                    c
                } else if r <= 0.0 {
                    0.0
                } else {
                    c * r.powf(p)
                }
            })
            .sum()
    }

    fn endpoint_exponents(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.terms.iter().map(|t| t.1).collect();
        e.sort_by(|x, y| x.total_cmp(y));
        e
    }
}

fn split_terms(s: &str) -> Result<Vec<(f64, &str)>> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut depth = 0i32;
    let mut start = 0;
    let mut sign = 1.0;
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                // exponent signs such as 1e-3 or ^-0.5 belong to the number
                let prev = if i > 0 { bytes[i - 1] } else { b'+' };
                if i > 0 && matches!(prev, b'e' | b'E' | b'^' | b'*') {
                    continue;
                }
                if i > start {
                    out.push((sign, &s[start..i]));
                } else if i > 0 {
                    return Err(Error::Domain(format!("dangling operator in '{s}'")));
                }
                sign = if b == b'-' { -1.0 } else { 1.0 };
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Domain(format!("unbalanced parentheses in '{s}'")));
    }
    if start >= s.len() {
        return Err(Error::Domain(format!("expression '{s}' ends with an operator")));
    }
    out.push((sign, &s[start..]));
    Ok(out)
}

fn parse_term(t: &str) -> Result<(f64, f64)> {
    let bad = || Error::Domain(format!("cannot parse term '{t}'"));
    let Some(open) = t.find('(') else {
        return t.parse::<f64>().map(|c| (c, 0.0)).map_err(|_| bad());
    };
    let coef = match t[..open].trim_end_matches('*') {
        "" => 1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let close = t.find(')').ok_or_else(bad)?;
    let inner = &t[open + 1..close];
    let ok_inner = inner.len() == 3 && matches!(inner.as_bytes()[0], b's' | b't' | b'u' | b'x') && &inner[1..] == "-a";
    if !ok_inner {
        return Err(Error::Domain(format!("expected (s-a) in term '{t}', found ({inner})")));
    }
    let rest = &t[close + 1..];
    let p = if rest.is_empty() {
        1.0
    } else {
        let e = rest.strip_prefix('^').ok_or_else(bad)?;
        let e = e.trim_start_matches('(').trim_end_matches(')');
        e.parse::<f64>().map_err(|_| bad())?
    };
    Ok((coef, p))
}

/// `coef · (u-a)^{ν-1} E^δ_{ρ,ν}(ω(u-a)^ρ)`.
#[derive(Debug, Clone)]
pub struct MlTerm {
    pub coef: f64,
    pub nu: f64,
    pub delta: f64,
    ml: MittagLeffler,
}

impl MlTerm {
    pub fn new(coef: f64, nu: f64, delta: f64, rho: f64) -> Result<Self> {
        Ok(MlTerm {
            coef,
            nu,
            delta,
            ml: MittagLeffler::extended(rho, nu, delta)?,
        })
    }
}

/// A finite sum of [`MlTerm`]s sharing `a`, `ρ` and `ω`.
///
/// This family is closed under Prabhakar integration, differentiation and
/// the Prabhakar derivative, which makes it the exact fast path for power
/// inputs.
#[derive(Debug, Clone)]
pub struct MlPowerSum {
    pub a: f64,
    pub rho: f64,
    pub omega: f64,
    pub terms: Vec<MlTerm>,
}

impl MlPowerSum {
    /// The single function `(u-a)^{ν-1} E^δ_{ρ,ν}(ω(u-a)^ρ)`.
    pub fn single(a: f64, rho: f64, omega: f64, nu: f64, delta: f64) -> Result<Self> {
        Ok(MlPowerSum {
            a,
            rho,
            omega,
            terms: vec![MlTerm::new(1.0, nu, delta, rho)?],
        })
    }

    fn map_terms(&self, f: impl Fn(&MlTerm) -> (f64, f64)) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (nu, delta) = f(t);
                MlTerm::new(t.coef, nu, delta, self.rho)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MlPowerSum { terms, ..*self })
    }

    pub fn prabhakar_integral(&self, gamma_: f64, mu_eff: f64) -> Result<Self> {
        if mu_eff < 0.0 {
            return Err(Error::Domain(format!("order must be >= 0, got {mu_eff}")));
        }
        self.map_terms(|t| (t.nu + mu_eff, t.delta + gamma_))
    }

    /// Classical derivative of order `k`.
    pub fn derivative(&self, k: u32) -> Result<Self> {
        self.map_terms(|t| (t.nu - k as f64, t.delta))
    }

    /// Prabhakar derivative of order `μ ∈ (2, 3]` and parameter `γ`.
    pub fn prabhakar_derivative(&self, gamma_: f64, mu: f64) -> Result<Self> {
        self.prabhakar_integral(-gamma_, 3.0 - mu)?.derivative(3)
    }
}

impl ScalarFn for MlPowerSum {
    fn eval(&self, u: f64) -> f64 {
        let r = u - self.a;
        if r < 0.0 {
            return 0.0;
        }
        let z = self.omega * r.powf(self.rho);
        self.terms
            .iter()
            .map(|t| {
                let v = t.ml.eval(z);
                if v == 0.0 || t.coef == 0.0 {
                    0.0
                } else {
                    t.coef * r.powf(t.nu - 1.0) * v
                }
            })
            .sum()
    }

    fn endpoint_exponents(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .terms
            .iter()
            .filter(|t| t.coef != 0.0)
            .flat_map(|t| [t.nu - 1.0, t.nu - 1.0 + self.rho])
            .collect();
        if e.is_empty() {
            e.push(0.0);
        }
        e.sort_by(|x, y| x.total_cmp(y));
        e
    }
}
