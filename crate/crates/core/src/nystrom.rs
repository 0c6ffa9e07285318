//! Nyström discretisation of the solution representation
//!
//! ```text
//! x(t) = ∫ G(t,s) q(s) x(s) ds + Λ(t) ∫ G(ξ,s) q(s) x(s) ds
//! ```
//!
//! The unknown `q x` is interpolated on Gauss-Legendre panels (graded toward
//! `a`, where `x ~ (t-a)^{μ-1}`), and the kernel is integrated exactly
//! against each Lagrange basis function wherever it is not smooth on the
//! panel: the factor `(b-s)^{μ-2}` near `b` and `(t-s)^{μ-1}` near the
//! diagonal. Far from both, the panel's own rule is used.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::func::{GridFunction, ScalarFn};
use crate::green::{BvpConfig, GreensFunction};
use crate::quadrature::{
    barycentric_weights, for_each_graded, gauss_legendre, grading_levels, lagrange_basis, weakest_exponent, End,
    GRADING_RATIO,
};
use crate::{Error, Result};

const MAX_GRADED_LEVELS: usize = 6;
const PRODUCT_ORDER: usize = 16;

/// Tolerances used by [`NystromOperator::verify`].
pub const INTEGRAL_RESIDUAL_TOL: f64 = 1e-8;
pub const BC_A_TOL: f64 = 1e-4;
pub const BC_B_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
struct Panel {
    lo: f64,
    hi: f64,
    start: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl Panel {
    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Panels on `[0, len]` (offsets from `a`) carrying exactly `n` nodes.
fn panel_layout(n: usize, len: f64) -> Vec<Panel> {
    let target = if n >= 128 { 16 } else { 8 };
    let count = ((n as f64 / target as f64).round() as usize).max(1);
    let graded = MAX_GRADED_LEVELS.min(count - 1);
    let uniform = count - graded;
    let h = len / uniform as f64;
    let mut breaks = vec![0.0];
    for k in (1..=graded).rev() {
        breaks.push(h * GRADING_RATIO.powi(k as i32));
    }
    for k in 1..=uniform {
        breaks.push(if k == uniform { len } else { h * k as f64 });
    }
    let base = n / count;
    let extra = n % count;
    let mut start = 0;
    breaks
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let order = base + usize::from(k >= count - extra);
            let (nodes, weights): (Vec<f64>, Vec<f64>) = gauss_legendre(order).mapped(w[0], w[1]).unzip();
            let bary = barycentric_weights(&nodes);
            let p = Panel {
                lo: w[0],
                hi: w[1],
                start,
                nodes,
                weights,
                bary,
            };
            start += order;
            p
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct NystromOperator {
    green: GreensFunction,
    panels: Vec<Panel>,
    nodes: Vec<f64>,
    offsets: Vec<f64>,
    weights: Vec<f64>,
    q_values: Vec<f64>,
    // ∫_P B ℓ_j, the row-independent part of every G row
    b_moments: Vec<f64>,
    // G-row at t = ξ, without q
    xi_row: Vec<f64>,
    kernel: DMatrix<f64>,
    levels_diag: usize,
}

/// Assembles `K[i][j] = ∫ [G(t_i,s) + Λ(t_i) G(ξ,s)] q(s) ℓ_j(s) ds`.
pub fn build_operator(cfg: &BvpConfig, q: &dyn ScalarFn, n: usize) -> Result<NystromOperator> {
    if n < 8 {
        return Err(Error::Domain(format!("need n >= 8 nodes, got {n}")));
    }
    let green = GreensFunction::new(cfg)?;
    let len = cfg.b - cfg.a;
    let panels = panel_layout(n, len);
    let offsets: Vec<f64> = panels.iter().flat_map(|p| p.nodes.iter().copied()).collect();
    let weights: Vec<f64> = panels.iter().flat_map(|p| p.weights.iter().copied()).collect();
    let nodes: Vec<f64> = offsets.iter().map(|v| cfg.a + v).collect();
    let q_values: Vec<f64> = nodes.iter().map(|&t| q.eval(t)).collect();
    if let Some(j) = q_values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("q is not finite at t = {}", nodes[j])));
    }

    let sp = &cfg.spec;
    let levels_b = grading_levels(weakest_exponent(&[sp.mu - 2.0, sp.mu - 2.0 + sp.rho]));
    let mut b_moments = vec![0.0; n];
    let mut basis = [0.0; PRODUCT_ORDER + 2];
    for p in &panels {
        let m = p.nodes.len();
        if len - p.hi >= p.width() {
            for k in 0..m {
                b_moments[p.start + k] = green.psi(len - p.nodes[k]) * p.weights[k];
            }
        } else {
            for_each_graded(p.lo, p.hi, End::Upper, levels_b, PRODUCT_ORDER, |v, w| {
                let bv = green.psi(len - v) * w;
                lagrange_basis(&p.nodes, &p.bary, v, &mut basis[..m]);
                for k in 0..m {
                    b_moments[p.start + k] += bv * basis[k];
                }
            });
        }
    }

    let levels_diag = grading_levels(weakest_exponent(&[
        sp.mu - 1.0,
        sp.mu - 1.0 + sp.rho,
        sp.mu - 1.0 + 2.0 * sp.rho,
    ]));
    let mut op = NystromOperator {
        green,
        panels,
        nodes,
        offsets,
        weights,
        q_values,
        b_moments,
        xi_row: Vec::new(),
        kernel: DMatrix::zeros(0, 0),
        levels_diag,
    };
    op.xi_row = op.green_row(cfg.xi - cfg.a);
    let rows: Vec<Vec<f64>> = op.offsets.par_iter().map(|&d| op.row_offset(d)).collect();
    op.kernel = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(op)
}

impl NystromOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn config(&self) -> &BvpConfig {
        self.green.config()
    }

    pub fn green(&self) -> &GreensFunction {
        &self.green
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn kernel_matrix(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// Sampled kernel `[G(t_i,s_j) + Λ(t_i) G(ξ,s_j)] q(s_j) w_j`, without
    /// the product-integration corrections.
    pub fn sampled_kernel_matrix(&self) -> DMatrix<f64> {
        let cfg = self.config();
        let xi_off = cfg.xi - cfg.a;
        DMatrix::from_fn(self.len(), self.len(), |i, j| {
            let (d, v) = (self.offsets[i], self.offsets[j]);
            let lam = cfg.beta * self.green.k(d) / self.green.denominator();
            (self.green.eval_offsets(d, v) + lam * self.green.eval_offsets(xi_off, v))
                * self.q_values[j]
                * self.weights[j]
        })
    }

    /// Weights `∫ G(a+d, s) ℓ_j(s) ds` for every node `j`.
    fn green_row(&self, d: f64) -> Vec<f64> {
        let g = &self.green;
        let scale = g.k(d) / g.d0();
        let mut row: Vec<f64> = self.b_moments.iter().map(|m| scale * m).collect();
        let mut basis = [0.0; PRODUCT_ORDER + 2];
        for p in &self.panels {
            if p.lo >= d {
                break;
            }
            let m = p.nodes.len();
            if d - p.hi >= p.width() {
                for k in 0..m {
                    row[p.start + k] -= g.k(d - p.nodes[k]) * p.weights[k];
                }
            } else {
                let up = p.hi.min(d);
                for_each_graded(p.lo, up, End::Upper, self.levels_diag, PRODUCT_ORDER, |v, w| {
                    let kv = g.k(d - v) * w;
                    lagrange_basis(&p.nodes, &p.bary, v, &mut basis[..m]);
                    for k in 0..m {
                        row[p.start + k] -= kv * basis[k];
                    }
                });
            }
        }
        row
    }

    /// Row of the operator at `t = a + d`, including `Λ(t)` and `q`.
    fn row_offset(&self, d: f64) -> Vec<f64> {
        let cfg = self.config();
        let lam = cfg.beta * self.green.k(d) / self.green.denominator();
        let mut row = self.green_row(d);
        for ((r, xi), q) in row.iter_mut().zip(&self.xi_row).zip(&self.q_values) {
            *r = (*r + lam * xi) * q;
        }
        row
    }

    /// Operator row at an arbitrary `t ∈ [a, b]`; `x(t) = row · x`.
    pub fn row_at(&self, t: f64) -> Vec<f64> {
        self.row_offset(t - self.config().a)
    }

    /// The Nyström interpolant through node values `x`, at `t = a + d`.
    pub fn interpolate_offset(&self, x: &[f64], d: f64) -> f64 {
        self.row_offset(d).iter().zip(x).map(|(r, v)| r * v).sum()
    }

    /// The same operator with `q` replaced by `c q`.
    pub fn scaled(&self, c: f64) -> NystromOperator {
        let mut op = self.clone();
        op.q_values.iter_mut().for_each(|v| *v *= c);
        op.kernel *= c;
        op
    }

    /// Checks the integral equation and both boundary conditions for node
    /// values `x`.
    pub fn verify(&self, x: &GridFunction) -> Result<ResidualReport> {
        if x.len() != self.len()
            || x.nodes()
                .iter()
                .zip(&self.nodes)
                .any(|(u, v)| (u - v).abs() > 1e-14 * (1.0 + v.abs()))
        {
            return Err(Error::Domain("x must be sampled on the operator's nodes".into()));
        }
        let cfg = *self.config();
        let xv = DVector::from_column_slice(x.values());
        let kx = &self.kernel * &xv;
        let integral_residual = (&xv - kx).amax();
        let len = cfg.b - cfg.a;
        let xs = x.values();

        let x_a = self.interpolate_offset(xs, 0.0).abs();
        // x ~ (t-a)^{μ-1}: the difference quotient only vanishes like h^{μ-2}
        let h = 1e-30 * len;
        let dx_a = ((4.0 * self.interpolate_offset(xs, h)
            - self.interpolate_offset(xs, 2.0 * h)
            - 3.0 * self.interpolate_offset(xs, 0.0))
            / (2.0 * h))
            .abs();
        let hb = 1e-4 * len;
        let dx_b = (3.0 * self.interpolate_offset(xs, len) - 4.0 * self.interpolate_offset(xs, len - hb)
            + self.interpolate_offset(xs, len - 2.0 * hb))
            / (2.0 * hb);
        let x_xi = self.interpolate_offset(xs, cfg.xi - cfg.a);
        let bc_b = (dx_b - cfg.beta * x_xi).abs();
        let trivial = x.sup_norm() == 0.0;
        Ok(ResidualReport {
            integral_residual,
            x_a,
            dx_a,
            dx_b,
            beta_x_xi: cfg.beta * x_xi,
            bc_b,
            tol_integral: INTEGRAL_RESIDUAL_TOL,
            tol_a: BC_A_TOL,
            tol_b: BC_B_TOL,
            trivial,
            pass: integral_residual <= INTEGRAL_RESIDUAL_TOL && x_a <= BC_A_TOL && dx_a <= BC_A_TOL && bc_b <= BC_B_TOL,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max_i |x_i - (K x)_i|`.
    pub integral_residual: f64,
    pub x_a: f64,
    pub dx_a: f64,
    pub dx_b: f64,
    pub beta_x_xi: f64,
    /// `|x'(b) - β x(ξ)|`.
    pub bc_b: f64,
    pub tol_integral: f64,
    pub tol_a: f64,
    pub tol_b: f64,
    pub trivial: bool,
    pub pass: bool,
}

/// Residuals of `x` as a solution for `(cfg, q)`; `x` must live on the
/// nodes of the `x.len()`-point operator.
pub fn verify_solution(cfg: &BvpConfig, q: &dyn ScalarFn, x: &GridFunction) -> Result<ResidualReport> {
    build_operator(cfg, q, x.len())?.verify(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralScaling {
    pub lambda_star: f64,
    pub x_star: GridFunction,
    /// `‖x* - K x* / λ*‖∞`.
    pub residual: f64,
}

/// Dominant eigenpair of `K`. Scaling `q` by `1/λ*` makes `x*` a
/// nontrivial solution of the scaled problem.
pub fn spectral_scale(op: &NystromOperator) -> Result<SpectralScaling> {
    let k = op.kernel_matrix();
    let norm = k.norm();
    if norm == 0.0 {
        return Err(Error::Eigen("operator is zero: dominant eigenvalue is 0".into()));
    }
    let eig = k.clone().complex_eigenvalues();
    let dominant = eig
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()).then(x.re.total_cmp(&y.re)))
        .ok_or_else(|| Error::Eigen("empty spectrum".into()))?;
    if dominant.norm() <= 1e-13 * norm {
        return Err(Error::Eigen("dominant eigenvalue is 0".into()));
    }
    if dominant.im.abs() > 1e-10 * dominant.norm() {
        return Err(Error::ComplexDominant {
            re: dominant.re,
            im: dominant.im.abs(),
        });
    }
    let lambda = dominant.re;
    let x = inverse_iteration(k, lambda)?;
    let residual = (&x - k * &x / lambda).amax();
    Ok(SpectralScaling {
        lambda_star: lambda,
        x_star: GridFunction::new(op.nodes().to_vec(), x.as_slice().to_vec())?,
        residual,
    })
}

fn inverse_iteration(k: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    let n = k.nrows();
    let shift = lambda * (1.0 + 1e-9);
    let lu = (k - DMatrix::identity(n, n) * shift).lu();
    let mut x = DVector::from_element(n, 1.0);
    for _ in 0..4 {
        x = lu
            .solve(&x)
            .ok_or_else(|| Error::Eigen("shifted matrix is singular".into()))?;
        let peak = x
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if peak == 0.0 || !peak.is_finite() {
            return Err(Error::Eigen("inverse iteration broke down".into()));
        }
        x /= peak;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(beta: f64, rho: f64, mu: f64, g: f64, w: f64) -> BvpConfig {
        BvpConfig::new(0.0, 1.0, 0.5, beta, rho, mu, g, w)
    }

    #[test]
    fn layout_has_exactly_n_nodes() {
        for n in [8, 9, 13, 50, 100, 127, 128, 200, 333, 400] {
            let panels = panel_layout(n, 2.0);
            let total: usize = panels.iter().map(|p| p.nodes.len()).sum();
            assert_eq!(total, n);
            assert_eq!(panels[0].lo, 0.0);
            assert_eq!(panels.last().unwrap().hi, 2.0);
            let w: f64 = panels.iter().flat_map(|p| p.weights.iter()).sum();
            assert!((w - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_q_gives_zero_matrix() {
        let op = build_operator(&cfg(0.1, 1.0, 2.5, 0.5, 0.3), &|_: f64| 0.0, 40).unwrap();
        assert_eq!(op.kernel_matrix().amax(), 0.0);
        assert!(spectral_scale(&op).is_err());
    }

    #[test]
    fn row_at_a_vanishes() {
        let op = build_operator(&cfg(0.1, 1.0, 2.5, 0.5, 0.3), &|t: f64| 1.0 + t, 40).unwrap();
        assert!(op.row_at(0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_operator(&cfg(0.1, 1.0, 2.5, 0.5, 0.3), &|_: f64| 1.0, 4).is_err());
        assert!(build_operator(&cfg(-0.1, 1.0, 2.5, 0.5, 0.3), &|_: f64| 1.0, 40).is_err());
        assert!(build_operator(&cfg(0.1, 1.0, 2.5, 0.5, 0.3), &|_: f64| f64::NAN, 40).is_err());
    }

    #[test]
    fn product_rule_integrates_green_exactly_against_polynomials() {
        // ∫ G(t,s) s^2 ds with ω = γ = 0 and β = 0 in closed form
        let c = cfg(0.0, 1.0, 2.5, 0.0, 0.0);
        let op = build_operator(&c, &|_: f64| 1.0, 64).unwrap();
        let g = op.green();
        let t = 0.37;
        let row = op.green_row(t);
        let approx: f64 = row.iter().zip(op.nodes()).map(|(r, s)| r * s * s).sum();
        let brute = crate::quadrature::integrate_graded(0.0, t, End::Upper, 40, 20, |s| g.eval(t, s) * s * s)
            + crate::quadrature::integrate_graded(t, 1.0, End::Upper, 40, 20, |s| g.eval(t, s) * s * s);
        assert!((approx - brute).abs() < 1e-13, "{approx} vs {brute}");
    }
}
