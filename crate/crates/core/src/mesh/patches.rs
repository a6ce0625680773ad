use super::{build_aux_triangulation, AuxTriangle, PolygonalMesh};
use crate::geometry::{diameter, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    /// Elements containing the node.
    Node,
    /// Aux triangles whose closure contains the node.
    NodeTilde,
    /// Elements sharing a node with the edge.
    Edge,
    /// Elements having the edge.
    EdgeTilde,
    /// Elements sharing a node with the element.
    Element,
    /// Elements sharing an edge with the element.
    ElementTilde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub kind: PatchKind,
    pub anchor: usize,
    /// Element ids, or global aux-triangle ids for [`PatchKind::NodeTilde`].
    pub members: Vec<usize>,
    pub diameter: f64,
}

/// All six patch families of a mesh plus the global aux triangulation.
#[derive(Debug, Clone)]
pub struct PatchTables {
    pub node: Vec<Patch>,
    pub node_tilde: Vec<Patch>,
    pub edge: Vec<Patch>,
    pub edge_tilde: Vec<Patch>,
    pub element: Vec<Patch>,
    pub element_tilde: Vec<Patch>,
    /// Global aux triangulation; element `K` owns `aux[aux_offsets[K]..aux_offsets[K+1]]`.
    pub aux: Vec<AuxTriangle>,
    pub aux_offsets: Vec<usize>,
}

impl PatchTables {
    /// Largest `h_{omega_z} / h_K` over nodes `z` and elements `K` in `omega_z`.
    pub fn node_patch_ratio(&self, mesh: &PolygonalMesh) -> f64 {
        self.node
            .iter()
            .flat_map(|p| p.members.iter().map(move |&k| p.diameter / mesh.element(k).diameter))
            .fold(0.0, f64::max)
    }
}

fn element_union_diameter(mesh: &PolygonalMesh, members: &[usize]) -> f64 {
    let pts: Vec<Point2> = members.iter().flat_map(|&k| mesh.element_points(k)).collect();
    diameter(&pts)
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

pub fn build_patches(mesh: &PolygonalMesh) -> PatchTables {
    let nn = mesh.num_nodes();
    let mut node_elems: Vec<Vec<usize>> = vec![Vec::new(); nn];
    for el in mesh.elements() {
        for &v in &el.boundary_loop {
            node_elems[v].push(el.id);
        }
    }
    let mut aux = Vec::new();
    let mut aux_offsets = Vec::with_capacity(mesh.num_elements() + 1);
    for el in mesh.elements() {
        aux_offsets.push(aux.len());
        aux.extend(build_aux_triangulation(mesh, el.id));
    }
    aux_offsets.push(aux.len());

    let node: Vec<Patch> = (0..nn)
        .map(|z| {
            let members = sorted_unique(node_elems[z].clone());
            Patch { kind: PatchKind::Node, anchor: z, diameter: element_union_diameter(mesh, &members), members }
        })
        .collect();
    let node_tilde: Vec<Patch> = (0..nn)
        .map(|z| {
            let mut members = Vec::new();
            for &k in &node[z].members {
                let el = mesh.element(k);
                let m = el.boundary_loop.len();
                for e in 0..m {
                    if el.boundary_loop[e] == z || el.boundary_loop[(e + 1) % m] == z {
                        members.push(aux_offsets[k] + e);
                    }
                }
            }
            let pts: Vec<Point2> = members.iter().flat_map(|&t| aux[t].vertices).collect();
            Patch { kind: PatchKind::NodeTilde, anchor: z, diameter: diameter(&pts), members }
        })
        .collect();
    let edge: Vec<Patch> = mesh
        .edges()
        .iter()
        .map(|e| {
            let mut m = node_elems[e.endpoints.0].clone();
            m.extend(&node_elems[e.endpoints.1]);
            let members = sorted_unique(m);
            Patch { kind: PatchKind::Edge, anchor: e.id, diameter: element_union_diameter(mesh, &members), members }
        })
        .collect();
    let edge_tilde: Vec<Patch> = mesh
        .edges()
        .iter()
        .map(|e| {
            let members = sorted_unique(e.incident_elements.clone());
            Patch { kind: PatchKind::EdgeTilde, anchor: e.id, diameter: element_union_diameter(mesh, &members), members }
        })
        .collect();
    let element: Vec<Patch> = mesh
        .elements()
        .iter()
        .map(|el| {
            let members = sorted_unique(el.boundary_loop.iter().flat_map(|&v| node_elems[v].iter().copied()).collect());
            Patch { kind: PatchKind::Element, anchor: el.id, diameter: element_union_diameter(mesh, &members), members }
        })
        .collect();
    let element_tilde: Vec<Patch> = mesh
        .elements()
        .iter()
        .map(|el| {
            let members =
                sorted_unique(el.edges.iter().flat_map(|&e| mesh.edge(e).incident_elements.iter().copied()).collect());
            Patch { kind: PatchKind::ElementTilde, anchor: el.id, diameter: element_union_diameter(mesh, &members), members }
        })
        .collect();
    PatchTables { node, node_tilde, edge, edge_tilde, element, element_tilde, aux, aux_offsets }
}
