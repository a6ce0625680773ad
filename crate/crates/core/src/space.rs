//! Degree-of-freedom layout of the Trefftz space and Dirichlet interpolation.
//!
//! Element-local harmonic basis functions are indexed like the element
//! trace basis: `0..m` are the hats at the loop vertices, then `k - 1`
//! integrated Legendre bubbles per local edge. Local edges run along the
//! loop, global edges from the lower to the higher node id.

use std::sync::Arc;

use crate::bem::operator::{bubble_index, trace_dim};
use crate::error::SpaceError;
use crate::geometry::Point2;
use crate::mesh::{BoundaryClass, PolygonalMesh};
use crate::poly::{legendre, Poly2};
use crate::quadrature::gauss;

/// Global position of a harmonic degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalDof {
    Free(usize),
    /// Index into the vector of Dirichlet values.
    Fixed(usize),
}

/// Local trace function of an element mapped to the global numbering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDof {
    pub dof: GlobalDof,
    /// `±1`: orientation factor between local and global edge bubbles.
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofHandler {
    pub order: usize,
    node_dof: Vec<GlobalDof>,
    /// First of the `k - 1` bubble slots per edge.
    edge_dof: Vec<GlobalDof>,
    n_free: usize,
    n_fixed: usize,
    bubble_offsets: Vec<usize>,
}

/// `dim P^{k-2}` in two variables.
pub fn bubbles_per_element(k: usize) -> usize {
    k * (k - 1) / 2
}

impl DofHandler {
    pub fn new(mesh: &PolygonalMesh, order: usize) -> Result<Self, SpaceError> {
        if order < 1 {
            return Err(SpaceError::InvalidOrder(order));
        }
        if !mesh.has_dirichlet() {
            return Err(SpaceError::MissingDirichlet);
        }
        let mut n_free = 0;
        let mut n_fixed = 0;
        let mut next = |dirichlet: bool, count: usize| {
            if dirichlet {
                n_fixed += count;
                GlobalDof::Fixed(n_fixed - count)
            } else {
                n_free += count;
                GlobalDof::Free(n_free - count)
            }
        };
        let node_dof: Vec<GlobalDof> =
            mesh.nodes().iter().map(|n| next(n.boundary_class == BoundaryClass::Dirichlet, 1)).collect();
        let edge_dof: Vec<GlobalDof> =
            mesh.edges().iter().map(|e| next(e.boundary_class == BoundaryClass::Dirichlet, order - 1)).collect();
        let nb = bubbles_per_element(order);
        let bubble_offsets = (0..=mesh.num_elements()).map(|k| k * nb).collect();
        Ok(Self { order, node_dof, edge_dof, n_free, n_fixed, bubble_offsets })
    }

    /// Free harmonic dofs.
    pub fn num_free(&self) -> usize {
        self.n_free
    }

    pub fn num_fixed(&self) -> usize {
        self.n_fixed
    }

    pub fn num_bubbles(&self) -> usize {
        *self.bubble_offsets.last().unwrap_or(&0)
    }

    /// Free harmonic dofs plus element bubbles.
    pub fn num_total(&self) -> usize {
        self.n_free + self.num_bubbles()
    }

    pub fn bubbles_per_element(&self) -> usize {
        bubbles_per_element(self.order)
    }

    pub fn bubble_range(&self, element: usize) -> std::ops::Range<usize> {
        self.bubble_offsets[element]..self.bubble_offsets[element + 1]
    }

    pub fn node_dof(&self, node: usize) -> GlobalDof {
        self.node_dof[node]
    }

    /// Dof of bubble `i` (`2..=k`) on an edge, in the global orientation.
    pub fn edge_dof(&self, edge: usize, i: usize) -> GlobalDof {
        match self.edge_dof[edge] {
            GlobalDof::Free(b) => GlobalDof::Free(b + i - 2),
            GlobalDof::Fixed(b) => GlobalDof::Fixed(b + i - 2),
        }
    }

    /// Global mapping of the element's local trace functions.
    pub fn local_dofs(&self, mesh: &PolygonalMesh, element: usize) -> Vec<LocalDof> {
        let el = mesh.element(element);
        let m = el.boundary_loop.len();
        let k = self.order;
        let mut out = vec![LocalDof { dof: GlobalDof::Free(0), sign: 1.0 }; trace_dim(m, k)];
        for (i, &v) in el.boundary_loop.iter().enumerate() {
            out[i] = LocalDof { dof: self.node_dof[v], sign: 1.0 };
        }
        for e in 0..m {
            let fwd = mesh.edge_forward(element, e);
            for i in 2..=k {
                let sign = if fwd || i % 2 == 0 { 1.0 } else { -1.0 };
                out[bubble_index(m, k, e, i)] = LocalDof { dof: self.edge_dof(el.edges[e], i), sign };
            }
        }
        out
    }

    /// Local trace coefficients of a global function.
    pub fn gather(&self, mesh: &PolygonalMesh, element: usize, free: &[f64], fixed: &[f64]) -> Vec<f64> {
        self.local_dofs(mesh, element)
            .iter()
            .map(|d| {
                d.sign
                    * match d.dof {
                        GlobalDof::Free(i) => free[i],
                        GlobalDof::Fixed(i) => fixed[i],
                    }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Nodal { node: usize },
    EdgeBubble { edge: usize, index: usize },
    ElementBubble { element: usize, index: usize },
}

/// Basis function supported on an element, with its local trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDescriptor {
    pub kind: BasisKind,
    pub dof: Option<GlobalDof>,
    /// Coefficients in the element trace basis (all zero for element bubbles).
    pub trace: Vec<f64>,
    /// Load `p_{K,i,j}` in the scaled element frame (element bubbles only).
    pub load: Option<Poly2>,
}

/// Exponents `(a, b)` of the bubble loads `X^a Y^b`, `a + b <= k - 2`.
pub fn bubble_exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if k < 2 {
        return out;
    }
    for d in 0..=k - 2 {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

pub fn element_trace_table(mesh: &PolygonalMesh, handler: &DofHandler, element: usize) -> Vec<BasisDescriptor> {
    let el = mesh.element(element);
    let m = el.boundary_loop.len();
    let k = handler.order;
    let nt = trace_dim(m, k);
    let local = handler.local_dofs(mesh, element);
    let mut out = Vec::with_capacity(nt + bubbles_per_element(k));
    for (t, ld) in local.iter().enumerate() {
        let mut trace = vec![0.0; nt];
        trace[t] = ld.sign;
        let kind = if t < m {
            BasisKind::Nodal { node: el.boundary_loop[t] }
        } else {
            let e = (t - m) / (k - 1);
            BasisKind::EdgeBubble { edge: el.edges[e], index: (t - m) % (k - 1) + 2 }
        };
        out.push(BasisDescriptor { kind, dof: Some(ld.dof), trace, load: None });
    }
    for (index, (a, b)) in bubble_exponents(k).into_iter().enumerate() {
        out.push(BasisDescriptor {
            kind: BasisKind::ElementBubble { element, index },
            dof: None,
            trace: vec![0.0; nt],
            load: Some(Poly2::monomial(a, b, 1.0)),
        });
    }
    out
}

/// Scalar function of position, shareable across threads.
pub type ScalarFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// Dirichlet data: a polynomial (exactly interpolated) or a general function.
#[derive(Clone)]
pub enum BoundaryData {
    Polynomial(Poly2),
    Function(ScalarFn),
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl BoundaryData {
    pub fn zero() -> Self {
        Self::Polynomial(Poly2::constant(0.0))
    }

    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            Self::Polynomial(q) => q.eval(p.x, p.y),
            Self::Function(f) => f(p),
        }
    }
}

/// Bubble coefficients `c_i`, `i = 2..=k`, of `g` on the segment `a -> b`
/// after removing the linear interpolant: `c_i = (2i-1)/2 int g' P_{i-1}`.
pub fn edge_bubble_coefficients(g: &dyn Fn(Point2) -> f64, a: Point2, b: Point2, k: usize) -> Vec<f64> {
    let ga = g(a);
    let gb = g(b);
    let rule = gauss(24);
    (2..=k)
        .map(|i| {
            // by parts: int g' P_{i-1} = [g P_{i-1}] - int g P_{i-1}'
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let mut s = gb - ga * sign;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let x = a.lerp(b, 0.5 * (t + 1.0));
                s -= w * g(x) * legendre_derivative(i - 1, *t);
            }
            0.5 * (2 * i - 1) as f64 * s
        })
        .collect()
}

fn legendre_derivative(n: usize, t: f64) -> f64 {
    // P_n' = sum over j = n-1, n-3, ... of (2j+1) P_j
    let mut s = 0.0;
    let mut j = n as isize - 1;
    while j >= 0 {
        s += (2 * j + 1) as f64 * legendre(j as usize, t);
        j -= 2;
    }
    s
}

/// Values of the Dirichlet-constrained nodal and edge dofs.
pub fn dirichlet_interpolant(mesh: &PolygonalMesh, handler: &DofHandler, g: &BoundaryData) -> Result<Vec<f64>, SpaceError> {
    let k = handler.order;
    let mut out = vec![0.0; handler.num_fixed()];
    let f = |p: Point2| g.eval(p);
    for n in mesh.nodes() {
        if let GlobalDof::Fixed(i) = handler.node_dof(n.id) {
            out[i] = f(n.position);
        }
    }
    for e in mesh.edges() {
        if e.boundary_class != BoundaryClass::Dirichlet {
            continue;
        }
        let (a, b) = (mesh.position(e.endpoints.0), mesh.position(e.endpoints.1));
        if let BoundaryData::Polynomial(p) = g {
            let mono = p.restrict(a, b);
            let scale = mono.iter().fold(0.0f64, |s, c| s.max(c.abs())).max(1e-300);
            if let Some(d) = (k + 1..mono.len()).rev().find(|&d| mono[d].abs() > 1e-12 * scale) {
                return Err(SpaceError::DataOrderTooHigh { degree: d, order: k });
            }
        }
        let c = edge_bubble_coefficients(&f, a, b, k);
        for i in 2..=k {
            if let GlobalDof::Fixed(idx) = handler.edge_dof(e.id, i) {
                out[idx] = c[i - 2];
            }
        }
    }
    Ok(out)
}

/// Value of the trace of a degree-`k` edge function at parameter `t`.
pub fn edge_trace_value(va: f64, vb: f64, bubbles: &[f64], t: f64) -> f64 {
    let mut s = 0.5 * (1.0 - t) * va + 0.5 * (1.0 + t) * vb;
    for (j, c) in bubbles.iter().enumerate() {
        s += c * crate::poly::integrated_legendre(j + 2, t);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, BoundaryTag, Rect, StructuredKind};

    fn square_left_dirichlet() -> PolygonalMesh {
        generate_structured(StructuredKind::Squares, 1, Rect::unit(), |a, b| {
            if a.x == 0.0 && b.x == 0.0 {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        })
    }

    #[test]
    fn dof_counts() {
        let all_d = generate_structured(StructuredKind::Squares, 1, Rect::unit(), |_, _| BoundaryTag::Dirichlet);
        assert_eq!(DofHandler::new(&all_d, 1).unwrap().num_total(), 0);
        let m = square_left_dirichlet();
        let h2 = DofHandler::new(&m, 2).unwrap();
        assert_eq!((h2.num_free(), h2.num_bubbles(), h2.num_total()), (5, 1, 6));
        assert_eq!(DofHandler::new(&m, 3).unwrap().num_total(), 11);
        assert_eq!(DofHandler::new(&m, 0).unwrap_err(), SpaceError::InvalidOrder(0));
        let all_n = generate_structured(StructuredKind::Squares, 1, Rect::unit(), |_, _| BoundaryTag::Neumann);
        assert_eq!(DofHandler::new(&all_n, 1).unwrap_err(), SpaceError::MissingDirichlet);
    }

    #[test]
    fn bubble_interpolation_is_exact() {
        // g = s(1-s) along the bottom edge, s = x
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        let g = |p: Point2| p.x * (1.0 - p.x);
        let c = edge_bubble_coefficients(&g, a, b, 2);
        assert_eq!(c.len(), 1);
        for j in 0..10 {
            let t = -1.0 + 2.0 * j as f64 / 9.0;
            let x = a.lerp(b, 0.5 * (t + 1.0));
            assert!((edge_trace_value(g(a), g(b), &c, t) - g(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn data_order_check() {
        let m = generate_structured(StructuredKind::Squares, 2, Rect::unit(), |_, _| BoundaryTag::Dirichlet);
        let h = DofHandler::new(&m, 1).unwrap();
        let lin = BoundaryData::Polynomial(Poly2::from_terms(&[(1, 0, 2.0), (0, 1, -1.0)]));
        let v = dirichlet_interpolant(&m, &h, &lin).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        let quad = BoundaryData::Polynomial(Poly2::monomial(2, 0, 1.0));
        assert_eq!(dirichlet_interpolant(&m, &h, &quad).unwrap_err(), SpaceError::DataOrderTooHigh { degree: 2, order: 1 });
    }

    #[test]
    fn trace_table_partition_of_unity() {
        let m = generate_structured(StructuredKind::LTiles, 1, Rect::unit(), |_, _| BoundaryTag::Dirichlet);
        let h = DofHandler::new(&m, 2).unwrap();
        let t = element_trace_table(&m, &h, 0);
        let nv = m.element(0).num_vertices();
        let sum: Vec<f64> = (0..t[0].trace.len()).map(|j| t[..nv].iter().map(|d| d.trace[j]).sum()).collect();
        assert!(sum[..nv].iter().all(|&s| s == 1.0));
        assert!(sum[nv..].iter().all(|&s| s == 0.0));
        assert_eq!(t.len(), 2 * nv + 1);
    }
}
