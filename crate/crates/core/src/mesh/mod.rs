//! Polygonal meshes with star-shaped elements and hanging nodes.

mod generate;
pub mod io;
mod patches;
mod refine;
mod regularity;

use std::collections::HashMap;

pub use generate::{generate_structured, Rect, StructuredKind};
pub use patches::{build_patches, Patch, PatchKind, PatchTables};
pub use refine::{glue_elements, split_element, split_elements, SplitRecord};
pub use regularity::{build_aux_triangulation, regularity_report, AuxTriangle, RegularityLimits, RegularityReport};

use crate::error::{GeometryError, MeshError};
use crate::geometry::{diameter, inscribed_circle, point_segment_distance, polygon_kernel, signed_area, validate_loop, Point2};

/// Boundary condition type of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundaryTag {
    #[default]
    Dirichlet,
    Neumann,
}

/// Classification of nodes and edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryClass {
    Interior,
    Dirichlet,
    Neumann,
}

impl From<BoundaryTag> for BoundaryClass {
    fn from(t: BoundaryTag) -> Self {
        match t {
            BoundaryTag::Dirichlet => BoundaryClass::Dirichlet,
            BoundaryTag::Neumann => BoundaryClass::Neumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Point2,
    pub boundary_class: BoundaryClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    /// Node ids, lower id first; this also fixes the edge parametrisation.
    pub endpoints: (usize, usize),
    pub incident_elements: Vec<usize>,
    pub boundary_class: BoundaryClass,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.incident_elements.len() == 1
    }
}

/// Cached geometric data of an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub center: Point2,
    pub radius: f64,
    pub diameter: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    /// Node ids in counter-clockwise order.
    pub boundary_loop: Vec<usize>,
    /// `edges[e]` joins `boundary_loop[e]` and `boundary_loop[e + 1]`.
    pub edges: Vec<usize>,
    pub kernel_center: Point2,
    pub kernel_radius: f64,
    pub diameter: f64,
    pub area: f64,
}

impl Element {
    pub fn num_vertices(&self) -> usize {
        self.boundary_loop.len()
    }
}

/// Sorted node pair.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Polygonal mesh. Positions, element loops and boundary tags are the
/// primary data; edges, incidences and element geometry are derived.
#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    elements: Vec<Element>,
    edge_map: HashMap<(usize, usize), usize>,
    tags: HashMap<(usize, usize), BoundaryTag>,
}

impl PolygonalMesh {
    /// Builds a mesh from node positions, CCW element loops and tags for
    /// boundary edges (unlisted boundary edges are Dirichlet).
    pub fn new(positions: Vec<Point2>, loops: Vec<Vec<usize>>, tags: HashMap<(usize, usize), BoundaryTag>) -> Result<Self, MeshError> {
        Self::with_geometry(positions, loops, tags, None)
    }

    pub(crate) fn with_geometry(
        positions: Vec<Point2>,
        loops: Vec<Vec<usize>>,
        tags: HashMap<(usize, usize), BoundaryTag>,
        known: Option<Vec<Option<ElementGeometry>>>,
    ) -> Result<Self, MeshError> {
        if let Some(p) = positions.iter().position(|p| !p.is_finite()) {
            return Err(MeshError::Inconsistent(format!("node {p} has non-finite coordinates")));
        }
        let mut elements = Vec::with_capacity(loops.len());
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, lp) in loops.into_iter().enumerate() {
            if let Some(&bad) = lp.iter().find(|&&v| v >= positions.len()) {
                return Err(MeshError::Inconsistent(format!("element {id} references unknown node {bad}")));
            }
            let pts: Vec<Point2> = lp.iter().map(|&v| positions[v]).collect();
            let geom = match known.as_ref().and_then(|k| k.get(id).copied().flatten()) {
                Some(g) => g,
                None => element_geometry(&pts).map_err(|source| MeshError::Element { element: id, source })?,
            };
            let m = lp.len();
            let mut eids = Vec::with_capacity(m);
            for e in 0..m {
                let (a, b) = (lp[e], lp[(e + 1) % m]);
                if a == b {
                    return Err(MeshError::Inconsistent(format!("element {id} repeats node {a}")));
                }
                let key = edge_key(a, b);
                let eid = *edge_map.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        id: edges.len(),
                        endpoints: key,
                        incident_elements: Vec::new(),
                        boundary_class: BoundaryClass::Interior,
                        length: positions[a].dist(positions[b]),
                    });
                    edges.len() - 1
                });
                edges[eid].incident_elements.push(id);
                eids.push(eid);
            }
            elements.push(Element {
                id,
                boundary_loop: lp,
                edges: eids,
                kernel_center: geom.center,
                kernel_radius: geom.radius,
                diameter: geom.diameter,
                area: geom.area,
            });
        }
        let mut nodes: Vec<Node> = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| Node { id, position, boundary_class: BoundaryClass::Interior })
            .collect();
        let mut kept_tags = HashMap::new();
        for e in &mut edges {
            match e.incident_elements.len() {
                1 => {
                    let tag = tags.get(&e.endpoints).copied().unwrap_or_default();
                    kept_tags.insert(e.endpoints, tag);
                    e.boundary_class = tag.into();
                }
                2 => {
                    let [k1, k2] = [e.incident_elements[0], e.incident_elements[1]];
                    if k1 == k2 {
                        return Err(MeshError::Inconsistent(format!("edge {:?} used twice by element {k1}", e.endpoints)));
                    }
                }
                n => {
                    return Err(MeshError::Inconsistent(format!("edge {:?} has {n} incident elements", e.endpoints)));
                }
            }
        }
        // Dirichlet dominates Neumann at shared nodes
        for e in &edges {
            if e.boundary_class == BoundaryClass::Interior {
                continue;
            }
            for v in [e.endpoints.0, e.endpoints.1] {
                let c = &mut nodes[v].boundary_class;
                if *c != BoundaryClass::Dirichlet {
                    *c = e.boundary_class;
                }
            }
        }
        Ok(Self { nodes, edges, elements, edge_map, tags: kept_tags })
    }

    /// Builds a mesh from element polygons, merging coincident points and
    /// inserting nodes that lie inside straight element edges (hanging nodes).
    pub fn from_polygons(polygons: &[Vec<Point2>], tag: impl Fn(Point2, Point2) -> BoundaryTag) -> Result<Self, MeshError> {
        let scale = polygons
            .iter()
            .flatten()
            .fold(0.0f64, |s, p| s.max(p.x.abs()).max(p.y.abs()))
            .max(1.0);
        let tol = 1e-11 * scale;
        let mut positions: Vec<Point2> = Vec::new();
        let mut lookup: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let cell = 1e3 * tol;
        let mut node_of = |p: Point2, positions: &mut Vec<Point2>| -> usize {
            let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(c) = lookup.get(&(key.0 + dx, key.1 + dy)) {
                        if let Some(&id) = c.iter().find(|&&id| positions[id].dist(p) <= tol) {
                            return id;
                        }
                    }
                }
            }
            positions.push(p);
            lookup.entry(key).or_default().push(positions.len() - 1);
            positions.len() - 1
        };
        let mut loops: Vec<Vec<usize>> = Vec::with_capacity(polygons.len());
        for poly in polygons {
            let mut lp: Vec<usize> = Vec::with_capacity(poly.len());
            for &p in poly {
                let id = node_of(p, &mut positions);
                if lp.last() != Some(&id) {
                    lp.push(id);
                }
            }
            if lp.len() > 1 && lp.first() == lp.last() {
                lp.pop();
            }
            loops.push(lp);
        }
        // hanging nodes: nodes inside straight edges of other elements
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].x.total_cmp(&positions[b].x));
        let xs: Vec<f64> = order.iter().map(|&i| positions[i].x).collect();
        for lp in &mut loops {
            let m = lp.len();
            let mut out = Vec::with_capacity(m);
            for e in 0..m {
                let (a, b) = (lp[e], lp[(e + 1) % m]);
                out.push(a);
                let (pa, pb) = (positions[a], positions[b]);
                let lo = xs.partition_point(|&x| x < pa.x.min(pb.x) - tol);
                let hi = xs.partition_point(|&x| x <= pa.x.max(pb.x) + tol);
                let len = pa.dist(pb);
                let mut inner: Vec<(f64, usize)> = order[lo..hi]
                    .iter()
                    .filter(|&&v| v != a && v != b)
                    .filter(|&&v| point_segment_distance(positions[v], pa, pb) <= tol)
                    .map(|&v| ((positions[v] - pa).dot(pb - pa) / (len * len), v))
                    .filter(|&(s, _)| s > 0.0 && s < 1.0)
                    .collect();
                inner.sort_by(|x, y| x.0.total_cmp(&y.0));
                out.extend(inner.into_iter().map(|(_, v)| v));
            }
            *lp = out;
        }
        // tags from the original boundary segments
        let mut tags = HashMap::new();
        for lp in &loops {
            let m = lp.len();
            for e in 0..m {
                let (a, b) = (lp[e], lp[(e + 1) % m]);
                tags.insert(edge_key(a, b), tag(positions[a], positions[b]));
            }
        }
        Self::new(positions, loops, tags)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn element(&self, id: usize) -> &Element {
        &self.elements[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn position(&self, node: usize) -> Point2 {
        self.nodes[node].position
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.nodes.iter().map(|n| n.position).collect()
    }

    /// Vertices of an element in loop order.
    pub fn element_points(&self, id: usize) -> Vec<Point2> {
        self.elements[id].boundary_loop.iter().map(|&v| self.nodes[v].position).collect()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_map.get(&edge_key(a, b)).copied()
    }

    /// Whether local edge `e` of the element runs from the lower to the higher node id.
    pub fn edge_forward(&self, element: usize, e: usize) -> bool {
        let lp = &self.elements[element].boundary_loop;
        lp[e] < lp[(e + 1) % lp.len()]
    }

    pub fn boundary_tags(&self) -> &HashMap<(usize, usize), BoundaryTag> {
        &self.tags
    }

    pub fn loops(&self) -> Vec<Vec<usize>> {
        self.elements.iter().map(|e| e.boundary_loop.clone()).collect()
    }

    pub(crate) fn geometries(&self) -> Vec<Option<ElementGeometry>> {
        self.elements
            .iter()
            .map(|e| {
                Some(ElementGeometry { center: e.kernel_center, radius: e.kernel_radius, diameter: e.diameter, area: e.area })
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Area enclosed by the boundary edges.
    pub fn domain_area(&self) -> f64 {
        let mut s = 0.0;
        for el in &self.elements {
            let m = el.boundary_loop.len();
            for (e, &eid) in el.edges.iter().enumerate() {
                if self.edges[eid].is_boundary() {
                    let a = self.position(el.boundary_loop[e]);
                    let b = self.position(el.boundary_loop[(e + 1) % m]);
                    s += 0.5 * a.cross(b);
                }
            }
        }
        s
    }

    pub fn h_max(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn has_dirichlet(&self) -> bool {
        self.edges.iter().any(|e| e.boundary_class == BoundaryClass::Dirichlet)
    }

    /// Verifies incidences, loop/edge agreement and the area partition.
    pub fn check_consistency(&self) -> Result<(), MeshError> {
        for e in &self.edges {
            let (a, b) = e.endpoints;
            if a == b || e.length <= 0.0 {
                return Err(MeshError::Inconsistent(format!("degenerate edge {}", e.id)));
            }
            let n = e.incident_elements.len();
            let boundary = e.boundary_class != BoundaryClass::Interior;
            if (boundary && n != 1) || (!boundary && n != 2) {
                return Err(MeshError::Inconsistent(format!("edge {} has {n} incident elements", e.id)));
            }
        }
        for el in &self.elements {
            let m = el.boundary_loop.len();
            for (e, &eid) in el.edges.iter().enumerate() {
                let key = edge_key(el.boundary_loop[e], el.boundary_loop[(e + 1) % m]);
                if self.edges[eid].endpoints != key || !self.edges[eid].incident_elements.contains(&el.id) {
                    return Err(MeshError::Inconsistent(format!("element {} edge {e} mismatch", el.id)));
                }
            }
            // interior edges must be traversed in opposite directions
        }
        for e in &self.edges {
            if let [k1, k2] = e.incident_elements[..] {
                let d1 = self.direction_in(k1, e.id);
                let d2 = self.direction_in(k2, e.id);
                if d1 == d2 {
                    return Err(MeshError::Inconsistent(format!("edge {} has equal orientation in {k1} and {k2}", e.id)));
                }
            }
        }
        let (a, d) = (self.area(), self.domain_area());
        if (a - d).abs() > 1e-10 * d.abs().max(1e-300) {
            return Err(MeshError::Inconsistent(format!("element areas {a} do not partition the domain area {d}")));
        }
        Ok(())
    }

    fn direction_in(&self, element: usize, edge: usize) -> bool {
        let el = &self.elements[element];
        let e = el.edges.iter().position(|&x| x == edge).expect("edge in element");
        self.edge_forward(element, e)
    }

    /// Neighbour across local edge `e` of `element`, if any.
    pub fn neighbor(&self, element: usize, e: usize) -> Option<usize> {
        let eid = self.elements[element].edges[e];
        self.edges[eid].incident_elements.iter().copied().find(|&k| k != element)
    }

    /// Local index of the edge in an element.
    pub fn local_edge(&self, element: usize, edge: usize) -> Option<usize> {
        self.elements[element].edges.iter().position(|&x| x == edge)
    }
}

/// Kernel circle, diameter and area of a loop.
pub fn element_geometry(pts: &[Point2]) -> Result<ElementGeometry, GeometryError> {
    validate_loop(pts)?;
    let kernel = polygon_kernel(pts)?;
    let (center, radius) = inscribed_circle(&kernel)?;
    if radius <= 0.0 {
        return Err(GeometryError::NotStarShaped);
    }
    Ok(ElementGeometry { center, radius, diameter: diameter(pts), area: signed_area(pts) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64, s: f64) -> Vec<Point2> {
        vec![Point2::new(x, y), Point2::new(x + s, y), Point2::new(x + s, y + s), Point2::new(x, y + s)]
    }

    #[test]
    fn two_by_two_squares() {
        let polys = vec![sq(0.0, 0.0, 0.5), sq(0.5, 0.0, 0.5), sq(0.0, 0.5, 0.5), sq(0.5, 0.5, 0.5)];
        let m = PolygonalMesh::from_polygons(&polys, |_, _| BoundaryTag::Dirichlet).unwrap();
        assert_eq!((m.num_elements(), m.num_nodes(), m.num_edges()), (4, 9, 12));
        m.check_consistency().unwrap();
        let interior = m.nodes().iter().filter(|n| n.boundary_class == BoundaryClass::Interior).count();
        assert_eq!(interior, 1);
    }

    #[test]
    fn hanging_nodes_are_inserted() {
        let polys = vec![sq(0.0, 0.0, 1.0), sq(1.0, 0.0, 0.5), sq(1.0, 0.5, 0.5)];
        let m = PolygonalMesh::from_polygons(&polys, |_, _| BoundaryTag::Dirichlet).unwrap();
        assert_eq!(m.element(0).num_vertices(), 5);
        m.check_consistency().unwrap();
    }

    #[test]
    fn neumann_tags_and_node_classes() {
        let polys = vec![sq(0.0, 0.0, 1.0)];
        // left edge Dirichlet only
        let m = PolygonalMesh::from_polygons(&polys, |a, b| {
            if a.x == 0.0 && b.x == 0.0 {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        })
        .unwrap();
        let d = m.nodes().iter().filter(|n| n.boundary_class == BoundaryClass::Dirichlet).count();
        assert_eq!(d, 2);
        assert_eq!(m.edges().iter().filter(|e| e.boundary_class == BoundaryClass::Neumann).count(), 3);
    }

    #[test]
    fn rejects_overlapping_orientation() {
        // a clockwise element
        let pos = sq(0.0, 0.0, 1.0);
        let r = PolygonalMesh::new(pos, vec![vec![0, 3, 2, 1]], HashMap::new());
        assert!(matches!(r, Err(MeshError::Element { .. })));
    }
}
