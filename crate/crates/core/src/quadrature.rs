//! Quadrature building blocks.
//!
//! * Gauss-Legendre rules (Newton iteration on `P_n`, cached per order).
//! * Gauss-Jacobi rules via Golub-Welsch.
//! * Composite Gauss-Legendre on geometrically graded meshes.
//! * [`convolve`]: `∫_lo^x (x-u)^α K(x-u) f(u) du` for weakly singular
//!   power kernels, with an optional power-law endpoint behaviour of `f` at
//!   `lo`. Both ends are treated by a power substitution that absorbs the
//!   leading singularity, followed by geometric grading for what is left.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::special::log_gamma;

const MAX_CACHED_ORDER: usize = 128;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maps the rule onto `[lo, hi]`, returning `(node, weight)` pairs.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

/// Cached `n`-point Gauss-Legendre rule, nodes ascending.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static CACHE: [OnceLock<GaussRule>; MAX_CACHED_ORDER + 1] = [const { OnceLock::new() }; MAX_CACHED_ORDER + 1];
    assert!(
        (1..=MAX_CACHED_ORDER).contains(&n),
        "Gauss-Legendre order {n} out of range"
    );
    CACHE[n].get_or_init(|| compute_gauss_legendre(n))
}

fn compute_gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Jacobi rule for the weight `(1-x)^α (1+x)^β` on `[-1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jacobi[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let off2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + alpha) * (m + beta) * (m + ab)
                    / ((2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0))
            };
            jacobi[(k, k + 1)] = off2.sqrt();
            jacobi[(k + 1, k)] = off2.sqrt();
        }
    }
    let log_mu0 =
        (ab + 1.0) * std::f64::consts::LN_2 + log_gamma(alpha + 1.0).unwrap() + log_gamma(beta + 1.0).unwrap()
            - log_gamma(ab + 2.0).unwrap();
    let mu0 = log_mu0.exp();
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Which end of an interval a graded mesh clusters toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Lower,
    Upper,
}

/// Ratio between consecutive graded subintervals.
pub const GRADING_RATIO: f64 = 0.25;

/// Number of geometric levels needed so that an endpoint term `w^c` is
/// resolved to about 1e-17 of the interval. Integer exponents need none.
pub fn grading_levels(c: Option<f64>) -> usize {
    match c {
        None => 0,
        Some(c) => {
            let digits = 17.0 / (1.0 + c.max(-0.99));
            (digits / (1.0 / GRADING_RATIO).log10()).ceil().clamp(1.0, 120.0) as usize
        }
    }
}

/// The smallest exponent in `candidates` that is not a non-negative
/// integer; those are the terms that defeat plain Gauss-Legendre.
pub fn weakest_exponent(candidates: &[f64]) -> Option<f64> {
    candidates
        .iter()
        .copied()
        .filter(|&c| !(c >= 0.0 && (c - c.round()).abs() < 1e-12))
        .min_by(|a, b| a.total_cmp(b))
}

/// Composite Gauss-Legendre on `[lo, hi]` graded toward `end` with `levels`
/// geometric levels, calling `f(x, w)` for every node.
pub fn for_each_graded(lo: f64, hi: f64, end: End, levels: usize, order: usize, mut f: impl FnMut(f64, f64)) {
    let rule = gauss_legendre(order);
    let len = hi - lo;
    let mut emit = |a: f64, b: f64| {
        // a, b are fractions of the interval measured from the graded end
        let (x0, x1) = match end {
            End::Lower => (lo + a * len, lo + b * len),
            End::Upper => (hi - b * len, hi - a * len),
        };
        for (x, w) in rule.mapped(x0, x1) {
            f(x, w);
        }
    };
    if levels == 0 {
        emit(0.0, 0.5);
        emit(0.5, 1.0);
        return;
    }
    let mut outer = 1.0;
    for _ in 0..levels {
        let inner = outer * GRADING_RATIO;
        emit(inner, outer);
        outer = inner;
    }
    emit(0.0, outer);
}

pub fn integrate_graded(lo: f64, hi: f64, end: End, levels: usize, order: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    for_each_graded(lo, hi, end, levels, order, |x, w| sum += w * f(x));
    sum
}

/// A kernel `r^α K(r)` where `K` is smooth in `r^inner_power`.
pub struct PowerKernel<'a> {
    pub alpha: f64,
    pub inner_power: f64,
    pub smooth: &'a (dyn Fn(f64) -> f64 + Sync),
}

/// `∫_lo^x (x-u)^α K(x-u) f(u) du` where `f` expands near `lo` in powers
/// `(u-lo)^{β_i}` with exponents `f_exponents`.
///
/// The interval is split at its midpoint. Near `u = x` the substitution
/// `r = h w^{1/(1+α)}` removes `r^α`; near `u = lo` the substitution
/// `v = h w^{1/(1+β)}` removes the leading `v^β`. The remaining fractional
/// powers are resolved by geometric grading toward `w = 0`.
pub fn convolve(
    kernel: &PowerKernel<'_>,
    f: &dyn Fn(f64) -> f64,
    f_exponents: &[f64],
    lo: f64,
    x: f64,
    order: usize,
) -> f64 {
    let len = x - lo;
    if len <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * len;
    let alpha = kernel.alpha;

    // upper half: r = x - u in (0, half]
    let p = 1.0 / (1.0 + alpha);
    let levels_a = grading_levels(weakest_exponent(&[p * kernel.inner_power, p]));
    let scale_a = half.powf(1.0 + alpha) / (1.0 + alpha);
    let upper = integrate_graded(0.0, 1.0, End::Lower, levels_a, order, |w| {
        let r = half * w.powf(p);
        (kernel.smooth)(r) * f(x - r)
    }) * scale_a;

    // lower half: v = u - lo in (0, half]
    let beta = f_exponents.iter().copied().fold(f64::INFINITY, f64::min).max(-0.999);
    let beta = if !beta.is_finite() || (beta >= 0.0 && beta == beta.round()) {
        0.0
    } else {
        beta
    };
    let q = 1.0 / (1.0 + beta);
    let mut residual: Vec<f64> = f_exponents.iter().map(|&b| q * (1.0 + b) - 1.0).collect();
    residual.push(q);
    let levels_b = grading_levels(weakest_exponent(&residual));
    let lower = integrate_graded(0.0, 1.0, End::Lower, levels_b, order, |w| {
        let wq = w.powf(q);
        let v = half * wq;
        let r = len - v;
        // f(lo + v) carries v^β; divide it out of the Jacobian instead
        r.powf(alpha) * (kernel.smooth)(r) * f(lo + v) * half * q * w.powf(q - 1.0)
    });
    upper + lower
}

/// Barycentric weights for Lagrange interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let span = nodes[n - 1] - nodes[0];
    let scale = if span > 0.0 { 4.0 / span } else { 1.0 };
    (0..n)
        .map(|j| {
            let prod: f64 = (0..n)
                .filter(|&k| k != j)
                .map(|k| (nodes[j] - nodes[k]) * scale)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Values of all Lagrange basis polynomials at `x`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    if let Some(j) = nodes.iter().position(|&t| t == x) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[j] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &t), &b) in out.iter_mut().zip(nodes).zip(bary) {
        *o = b / (x - t);
        denom += *o;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}
