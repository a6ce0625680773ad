//! Element and edge bubbles over the auxiliary triangulation.
//!
//! `φ_K` is the sum of the cubic bubbles `27 λ1 λ2 λ3` of the triangles of
//! `K`; `φ_E` is the piecewise quadratic `4 λ_a λ_b` on the triangles
//! sharing `E`. Both have maximum one.

use nalgebra::DMatrix;

use crate::geometry::Point2;
use crate::mesh::{build_aux_triangulation, AuxTriangle, PolygonalMesh};
use crate::poly::legendre_all;
use crate::quadrature::{gauss, triangle_rule};

fn barycentric(t: &AuxTriangle, p: Point2) -> [f64; 3] {
    let [a, b, c] = t.vertices;
    let d = (b - a).cross(c - a);
    let l1 = (c - b).cross(p - b) / d;
    let l2 = (a - c).cross(p - c) / d;
    [l1, l2, 1.0 - l1 - l2]
}

/// Gradients of the barycentric coordinates.
fn barycentric_gradients(t: &AuxTriangle) -> [Point2; 3] {
    let [a, b, c] = t.vertices;
    let d = (b - a).cross(c - a);
    let rot = |v: Point2| Point2::new(-v.y, v.x) * (1.0 / d);
    [rot(c - b), rot(a - c), rot(b - a)]
}

fn inside(l: &[f64; 3]) -> bool {
    l.iter().all(|&v| v >= -1e-14)
}

/// `φ_K(x)`, zero outside `K`.
pub fn element_bubble(mesh: &PolygonalMesh, element: usize, x: Point2) -> f64 {
    for t in build_aux_triangulation(mesh, element) {
        let l = barycentric(&t, x);
        if inside(&l) {
            return (27.0 * l[0] * l[1] * l[2]).max(0.0);
        }
    }
    0.0
}

/// Triangles `T_E` of the elements sharing an edge.
fn edge_triangles(mesh: &PolygonalMesh, edge: usize) -> Vec<AuxTriangle> {
    mesh.edge(edge)
        .incident_elements
        .iter()
        .map(|&k| {
            let e = mesh.local_edge(k, edge).expect("incident");
            build_aux_triangulation(mesh, k)[e]
        })
        .collect()
}

/// `φ_E(x)`, zero outside the triangles sharing `E`.
pub fn edge_bubble(mesh: &PolygonalMesh, edge: usize, x: Point2) -> f64 {
    for t in edge_triangles(mesh, edge) {
        let l = barycentric(&t, x);
        if inside(&l) {
            // the edge joins the first two vertices of T_E
            return (4.0 * l[0] * l[1]).max(0.0);
        }
    }
    0.0
}

/// Measured constants of the bubble inequalities on `P^k` for one element.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleConstants {
    /// `‖p‖²_K ≤ c (φ_K p, p)_K`.
    pub element_mass: f64,
    /// `|φ_K p|_{1,K} ≤ c h_K^{-1} ‖p‖_K`.
    pub element_gradient: f64,
    /// Per local edge: `‖p‖²_E ≤ c (φ_E p, p)_E`.
    pub edge_mass: Vec<f64>,
    /// Per local edge: `|φ_E p|_1 ≤ c h_E^{-1/2} ‖p‖_E` over the support of `φ_E`.
    pub edge_gradient: Vec<f64>,
    /// Per local edge: `‖φ_E p‖_0 ≤ c h_E^{1/2} ‖p‖_E`.
    pub edge_extension: Vec<f64>,
}

/// Extreme eigenvalues of `A x = λ M x` with `M` SPD.
fn generalized_range(a: &DMatrix<f64>, m: &DMatrix<f64>) -> (f64, f64) {
    let l = m.clone().cholesky().expect("mass matrix is SPD").l();
    let li = l.try_inverse().expect("triangular factor is invertible");
    let c = &li * a * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let ev = c.symmetric_eigen().eigenvalues;
    (ev.min(), ev.max())
}

fn sym_add(m: &mut DMatrix<f64>, v: &[f64], w: f64) {
    for i in 0..v.len() {
        for j in 0..v.len() {
            m[(i, j)] += w * v[i] * v[j];
        }
    }
}

/// Dense generalised eigenproblems for the five inequalities.
pub fn bubble_constants(mesh: &PolygonalMesh, element: usize, k: usize) -> BubbleConstants {
    let el = mesh.element(element);
    let (z, h) = (el.kernel_center, el.diameter);
    let exps: Vec<(i32, i32)> = (0..=k as i32).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
    let n = exps.len();
    let eval = |x: Point2| -> (Vec<f64>, Vec<Point2>) {
        let (sx, sy) = ((x.x - z.x) / h, (x.y - z.y) / h);
        let pw = |s: f64, e: i32| if e < 0 { 0.0 } else { s.powi(e) };
        let v = exps.iter().map(|&(a, b)| pw(sx, a) * pw(sy, b)).collect();
        let g = exps
            .iter()
            .map(|&(a, b)| Point2::new(a as f64 * pw(sx, a - 1) * pw(sy, b) / h, b as f64 * pw(sx, a) * pw(sy, b - 1) / h))
            .collect();
        (v, g)
    };
    let mut mass = DMatrix::zeros(n, n);
    let mut weighted = DMatrix::zeros(n, n);
    let mut grad = DMatrix::zeros(n, n);
    for t in build_aux_triangulation(mesh, element) {
        let dl = barycentric_gradients(&t);
        let [a, b, c] = t.vertices;
        for qp in triangle_rule(a, b, c, 2 * k + 8) {
            let l = barycentric(&t, qp.point);
            let phi = 27.0 * l[0] * l[1] * l[2];
            let dphi = (dl[0] * (l[1] * l[2]) + dl[1] * (l[0] * l[2]) + dl[2] * (l[0] * l[1])) * 27.0;
            let (v, g) = eval(qp.point);
            sym_add(&mut mass, &v, qp.weight);
            sym_add(&mut weighted, &v, qp.weight * phi);
            let gx: Vec<f64> = (0..n).map(|i| dphi.x * v[i] + phi * g[i].x).collect();
            let gy: Vec<f64> = (0..n).map(|i| dphi.y * v[i] + phi * g[i].y).collect();
            sym_add(&mut grad, &gx, qp.weight);
            sym_add(&mut grad, &gy, qp.weight);
        }
    }
    let element_mass = 1.0 / generalized_range(&weighted, &mass).0;
    let element_gradient = h * generalized_range(&grad, &mass).1.sqrt();

    let mut edge_mass = Vec::new();
    let mut edge_gradient = Vec::new();
    let mut edge_extension = Vec::new();
    let ne = k + 1;
    let mut leg = vec![0.0; ne + 1];
    for &edge in &el.edges {
        let ed = mesh.edge(edge);
        let (pa, pb) = (mesh.position(ed.endpoints.0), mesh.position(ed.endpoints.1));
        let len = ed.length;
        let tau = (pb - pa) * (1.0 / len);
        let mut me = DMatrix::zeros(ne, ne);
        let mut be = DMatrix::zeros(ne, ne);
        let g = gauss(k + 3);
        for (s, w) in g.nodes.iter().zip(&g.weights) {
            legendre_all(k, *s, &mut leg);
            sym_add(&mut me, &leg[..ne], 0.5 * len * w);
            sym_add(&mut be, &leg[..ne], 0.5 * len * w * (1.0 - s * s));
        }
        // p extended constantly in the normal direction
        let mut ge = DMatrix::zeros(ne, ne);
        let mut we = DMatrix::zeros(ne, ne);
        for t in edge_triangles(mesh, edge) {
            let dl = barycentric_gradients(&t);
            let [a, b, c] = t.vertices;
            for qp in triangle_rule(a, b, c, 2 * k + 6) {
                let l = barycentric(&t, qp.point);
                let phi = 4.0 * l[0] * l[1];
                let dphi = (dl[0] * l[1] + dl[1] * l[0]) * 4.0;
                let s = 2.0 * (qp.point - pa).dot(tau) / len - 1.0;
                legendre_all(k + 1, s, &mut leg);
                let v: Vec<f64> = leg[..ne].to_vec();
                let dv: Vec<f64> = (0..ne).map(|l| legendre_derivative(l, s) * 2.0 / len).collect();
                sym_add(&mut we, &v.iter().map(|x| x * phi).collect::<Vec<_>>(), qp.weight);
                let gx: Vec<f64> = (0..ne).map(|i| dphi.x * v[i] + phi * dv[i] * tau.x).collect();
                let gy: Vec<f64> = (0..ne).map(|i| dphi.y * v[i] + phi * dv[i] * tau.y).collect();
                sym_add(&mut ge, &gx, qp.weight);
                sym_add(&mut ge, &gy, qp.weight);
            }
        }
        edge_mass.push(1.0 / generalized_range(&be, &me).0);
        edge_gradient.push(len.sqrt() * generalized_range(&ge, &me).1.sqrt());
        edge_extension.push(generalized_range(&we, &me).1.sqrt() / len.sqrt());
    }
    BubbleConstants { element_mass, element_gradient, edge_mass, edge_gradient, edge_extension }
}

fn legendre_derivative(n: usize, t: f64) -> f64 {
    let mut s = 0.0;
    let mut j = n as isize - 1;
    while j >= 0 {
        s += (2 * j + 1) as f64 * crate::poly::legendre(j as usize, t);
        j -= 2;
    }
    s
}
