//! Gauss rules on intervals and triangles.

use std::sync::OnceLock;

use crate::geometry::Point2;

const MAX_CACHED: usize = 64;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_gauss(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
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

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss-Legendre rule with `n >= 1` points.
pub fn gauss(n: usize) -> &'static GaussRule {
    static TABLE: OnceLock<Vec<GaussRule>> = OnceLock::new();
    assert!((1..=MAX_CACHED).contains(&n), "gauss rule size {n} out of range");
    &TABLE.get_or_init(|| (1..=MAX_CACHED).map(compute_gauss).collect())[n - 1]
}

/// Rule on [0,1] clustered towards 0 through the substitution s = tau^q;
/// integrates endpoint singularities of type s^m ln s to high accuracy.
pub fn graded_unit(n: usize, q: i32) -> Vec<(f64, f64)> {
    let g = gauss(n);
    g.nodes
        .iter()
        .zip(&g.weights)
        .map(|(&x, &w)| {
            let tau = 0.5 * (x + 1.0);
            let s = tau.powi(q);
            (s, 0.5 * w * q as f64 * tau.powi(q - 1))
        })
        .collect()
}

/// Quadrature point in physical coordinates.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub point: Point2,
    pub weight: f64,
}

/// Collapsed Gauss rule on a triangle, exact for polynomials of the given total degree.
pub fn triangle_rule(a: Point2, b: Point2, c: Point2, degree: usize) -> Vec<QuadPoint> {
    let n = (degree + 2).div_ceil(2).max(1);
    let g = gauss(n);
    let area2 = (b - a).cross(c - a).abs();
    let mut out = Vec::with_capacity(n * n);
    for (i, &xi) in g.nodes.iter().enumerate() {
        let s = 0.5 * (xi + 1.0);
        for (j, &eta) in g.nodes.iter().enumerate() {
            let t = 0.5 * (eta + 1.0);
            // (s, t) in unit square -> barycentric (1-s, s(1-t), st)
            let l1 = s * (1.0 - t);
            let l2 = s * t;
            let p = a + (b - a) * l1 + (c - a) * l2;
            let w = 0.25 * g.weights[i] * g.weights[j] * s * area2;
            out.push(QuadPoint { point: p, weight: w });
        }
    }
    out
}

/// Triangle rule refined towards the vertex `a` by `levels` dyadic subdivisions.
pub fn triangle_rule_graded(a: Point2, b: Point2, c: Point2, degree: usize, levels: usize) -> Vec<QuadPoint> {
    if levels == 0 {
        return triangle_rule(a, b, c, degree);
    }
    let ab = a.midpoint(b);
    let ac = a.midpoint(c);
    let bc = b.midpoint(c);
    let mut out = triangle_rule_graded(a, ab, ac, degree, levels - 1);
    out.extend(triangle_rule(ab, b, bc, degree));
    out.extend(triangle_rule(ac, bc, c, degree));
    out.extend(triangle_rule(ab, bc, ac, degree));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        for n in 1..=20 {
            let g = gauss(n);
            for p in 0..2 * n {
                let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                assert!((s - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn graded_rule_handles_log() {
        // int_0^1 s ln s ds = -1/4
        let s: f64 = graded_unit(16, 4).iter().map(|(s, w)| w * s * s.ln()).sum();
        assert!((s + 0.25).abs() < 1e-13);
        let s: f64 = graded_unit(16, 4).iter().map(|(s, w)| w * s.ln()).sum();
        assert!((s + 1.0).abs() < 1e-7, "{s}");
    }

    #[test]
    fn triangle_rule_exactness() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        let c = Point2::new(0.0, 1.0);
        // int x^2 y over unit triangle = 2! 1! / 5! = 1/60
        for rule in [triangle_rule(a, b, c, 3), triangle_rule_graded(a, b, c, 3, 2)] {
            let s: f64 = rule.iter().map(|q| q.weight * q.point.x.powi(2) * q.point.y).sum();
            assert!((s - 1.0 / 60.0).abs() < 1e-15);
        }
    }
}
