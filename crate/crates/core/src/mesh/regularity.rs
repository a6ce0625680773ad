use std::f64::consts::PI;

use super::PolygonalMesh;
use crate::geometry::Point2;

/// Limits a mesh must satisfy to count as regular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityLimits {
    pub sigma_max: f64,
    pub c_max: f64,
}

impl Default for RegularityLimits {
    fn default() -> Self {
        Self { sigma_max: 20.0, c_max: 40.0 }
    }
}

/// Triangle of the auxiliary triangulation, `z_b z_e z_K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxTriangle {
    pub element: usize,
    /// Local edge index within the element.
    pub local_edge: usize,
    /// Global edge id.
    pub edge: usize,
    pub vertices: [Point2; 3],
}

impl AuxTriangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(c - a)
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices;
        a.dist(b).max(b.dist(c)).max(a.dist(c))
    }

    pub fn inradius(&self) -> f64 {
        let [a, b, c] = self.vertices;
        2.0 * self.area() / (a.dist(b) + b.dist(c) + c.dist(a))
    }

    /// `h_T / rho_T` with the incircle radius.
    pub fn aspect_ratio(&self) -> f64 {
        self.diameter() / self.inradius()
    }

    pub fn contains(&self, p: Point2) -> bool {
        let [a, b, c] = self.vertices;
        let tol = -1e-12 * self.diameter() * self.diameter();
        (b - a).cross(p - a) >= tol && (c - b).cross(p - b) >= tol && (a - c).cross(p - c) >= tol
    }
}

/// Triangles `T_E` joining the edges of an element with its kernel centre.
pub fn build_aux_triangulation(mesh: &PolygonalMesh, element: usize) -> Vec<AuxTriangle> {
    let el = mesh.element(element);
    let m = el.boundary_loop.len();
    (0..m)
        .map(|e| AuxTriangle {
            element,
            local_edge: e,
            edge: el.edges[e],
            vertices: [mesh.position(el.boundary_loop[e]), mesh.position(el.boundary_loop[(e + 1) % m]), el.kernel_center],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementRegularity {
    pub sigma: f64,
    pub c: f64,
    pub alpha: f64,
    pub min_aux_area_ratio: f64,
    pub max_aux_aspect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub elements: Vec<ElementRegularity>,
    pub sigma_max: f64,
    pub c_max: f64,
    /// Bound `3 c sigma` on aux-triangle aspect ratios.
    pub sigma_t: f64,
    pub max_aux_aspect: f64,
    pub passed: bool,
}

impl RegularityReport {
    /// Elements violating the limits.
    pub fn failures(&self, limits: &RegularityLimits) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, r)| r.sigma > limits.sigma_max || r.c > limits.c_max)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Aspect ratios and edge-length ratios of all elements.
pub fn regularity_report(mesh: &PolygonalMesh, limits: &RegularityLimits) -> RegularityReport {
    let mut elements = Vec::with_capacity(mesh.num_elements());
    for el in mesh.elements() {
        let sigma = el.diameter / el.kernel_radius;
        let min_e = el.edges.iter().map(|&e| mesh.edge(e).length).fold(f64::INFINITY, f64::min);
        let c = el.diameter / min_e;
        let alpha = (PI / 3.0).min((1.0 / sigma).asin());
        let tris = build_aux_triangulation(mesh, el.id);
        let mut min_ratio = f64::INFINITY;
        let mut max_aspect = 0.0f64;
        for t in &tris {
            let he = mesh.edge(t.edge).length;
            min_ratio = min_ratio.min(t.area() / (0.5 * he * el.kernel_radius));
            max_aspect = max_aspect.max(t.aspect_ratio());
        }
        elements.push(ElementRegularity { sigma, c, alpha, min_aux_area_ratio: min_ratio, max_aux_aspect: max_aspect });
    }
    let sigma_max = elements.iter().map(|r| r.sigma).fold(0.0, f64::max);
    let c_max = elements.iter().map(|r| r.c).fold(0.0, f64::max);
    let max_aux_aspect = elements.iter().map(|r| r.max_aux_aspect).fold(0.0, f64::max);
    let passed = elements.iter().all(|r| r.sigma <= limits.sigma_max && r.c <= limits.c_max);
    RegularityReport { elements, sigma_max, c_max, sigma_t: 3.0 * c_max * sigma_max, max_aux_aspect, passed }
}
