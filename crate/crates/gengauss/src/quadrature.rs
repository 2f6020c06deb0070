//! Gauss-Legendre rules, adaptive interval bisection, and a collapsed-square
//! product rule on triangles with adaptive midpoint refinement.

use nalgebra::Vector3;
use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Accuracy settings shared by the facet and radial integrators.
#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    /// Points per segment of the 1-D rule; the error estimate uses `segment_order - 6`.
    pub segment_order: usize,
    /// Points per axis of the collapsed-square triangle rule; the estimate uses `triangle_order - 2`.
    pub triangle_order: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth_1d: usize,
    pub max_depth_2d: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            segment_order: 16,
            triangle_order: 7,
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_depth_1d: 30,
            max_depth_2d: 8,
        }
    }
}

/// A high-order rule paired with a lower-order rule whose difference estimates the error.
#[derive(Debug, Clone)]
pub struct EmbeddedPair<R> {
    pub high: R,
    pub low: R,
}

impl EmbeddedPair<GaussLegendre> {
    pub fn segment(order: usize) -> Self {
        Self {
            high: GaussLegendre::new(order),
            low: GaussLegendre::new(order.saturating_sub(6).max(2)),
        }
    }
}

impl EmbeddedPair<TriangleRule> {
    pub fn triangle(order: usize) -> Self {
        Self {
            high: TriangleRule::new(order),
            low: TriangleRule::new(order.saturating_sub(2).max(2)),
        }
    }
}

/// Adaptive bisection of [a, b] until the embedded pair agrees.
pub fn adaptive_1d<F: Fn(f64) -> f64>(
    pair: &EmbeddedPair<GaussLegendre>,
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> f64 {
    let hi = pair.high.integrate(f, a, b);
    let lo = pair.low.integrate(f, a, b);
    if max_depth == 0 || (hi - lo).abs() <= abs_tol.max(rel_tol * hi.abs()) {
        return hi;
    }
    let m = 0.5 * (a + b);
    adaptive_1d(pair, f, a, m, 0.5 * abs_tol, rel_tol, max_depth - 1)
        + adaptive_1d(pair, f, m, b, 0.5 * abs_tol, rel_tol, max_depth - 1)
}

/// Product rule on a triangle obtained by collapsing one edge of the unit square.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    /// Square coordinates (s, t) and weights including the collapse Jacobian s.
    points: Vec<(f64, f64, f64)>,
}

impl TriangleRule {
    pub fn new(order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let mut points = Vec::with_capacity(order * order);
        for (xs, ws) in gl.nodes.iter().zip(&gl.weights) {
            let s = 0.5 * (xs + 1.0);
            for (xt, wt) in gl.nodes.iter().zip(&gl.weights) {
                let t = 0.5 * (xt + 1.0);
                points.push((s, t, 0.25 * ws * wt * s));
            }
        }
        Self { points }
    }

    /// Integral of `f` over the triangle (a, b, c).
    pub fn integrate<F: Fn(&Vector3<f64>) -> f64>(
        &self,
        f: &F,
        a: &Vector3<f64>,
        b: &Vector3<f64>,
        c: &Vector3<f64>,
    ) -> f64 {
        let e1 = b - a;
        let e2 = c - b;
        let jac = e1.cross(&(c - a)).norm();
        let mut s = 0.0;
        for &(u, v, w) in &self.points {
            let x = a + e1 * u + e2 * (u * v);
            s += w * f(&x);
        }
        s * jac
    }
}

/// Adaptive midpoint subdivision of a triangle until the embedded pair agrees.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_triangle<F: Fn(&Vector3<f64>) -> f64>(
    pair: &EmbeddedPair<TriangleRule>,
    f: &F,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    c: &Vector3<f64>,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> f64 {
    let hi = pair.high.integrate(f, a, b, c);
    let lo = pair.low.integrate(f, a, b, c);
    if max_depth == 0 || (hi - lo).abs() <= abs_tol.max(rel_tol * hi.abs()) {
        return hi;
    }
    let ab = 0.5 * (a + b);
    let bc = 0.5 * (b + c);
    let ca = 0.5 * (c + a);
    let t = 0.25 * abs_tol;
    let d = max_depth - 1;
    adaptive_triangle(pair, f, a, &ab, &ca, t, rel_tol, d)
        + adaptive_triangle(pair, f, &ab, b, &bc, t, rel_tol, d)
        + adaptive_triangle(pair, f, &ca, &bc, c, t, rel_tol, d)
        + adaptive_triangle(pair, f, &ab, &bc, &ca, t, rel_tol, d)
}
