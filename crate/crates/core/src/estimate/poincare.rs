//! Upper bounds for Poincaré constants of patches from admissible
//! decompositions into pieces with known constants.

use std::f64::consts::PI;

use crate::geometry::{diameter, Point2};
use crate::mesh::{build_aux_triangulation, AuxTriangle, Patch, PatchKind, PatchTables, PolygonalMesh};

/// Payne–Weinberger constant of convex domains.
const CONVEX: f64 = 1.0 / PI;

/// One piece `ω_i` of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceData {
    pub area: f64,
    pub diameter: f64,
    /// Area of the triangle `T_i ⊂ ω_i` linking the pieces.
    pub triangle_area: f64,
    /// Poincaré constant of the piece (or an upper bound).
    pub constant: f64,
    /// Radius of a circle the piece is star-shaped to, for split elements.
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchPoincareBound {
    pub kind: PatchKind,
    pub anchor: usize,
    pub pieces: Vec<PieceData>,
    pub area: f64,
    pub diameter: f64,
    /// Upper bound for `C_P(ω)`.
    pub bound: f64,
}

/// Decomposition bound for `ω = ∪ ω_i`. A single piece returns its own constant.
pub fn decomposition_bound(pieces: &[PieceData], area: f64, diameter: f64) -> f64 {
    let n = pieces.len();
    if n == 1 {
        return pieces[0].constant;
    }
    let min_frac = pieces.iter().map(|p| p.area).fold(f64::INFINITY, f64::min) / area;
    let pre = 8.0 * (n as f64 - 1.0) * (1.0 - min_frac);
    pieces
        .iter()
        .map(|p| {
            let c = p.constant;
            pre * (c * c + 2.0 * c) * area * p.diameter * p.diameter / (p.triangle_area * diameter * diameter)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// `ρ sin(β/2) / (1 + sin(β/2))`.
pub fn split_piece_radius(rho: f64, beta: f64) -> f64 {
    let s = (0.5 * beta).sin();
    rho * s / (1.0 + s)
}

fn triangle_piece(t: &AuxTriangle) -> PieceData {
    PieceData { area: t.area(), diameter: t.diameter(), triangle_area: t.area(), constant: CONVEX, radius: None }
}

fn union_diameter(tris: &[AuxTriangle]) -> f64 {
    let pts: Vec<Point2> = tris.iter().flat_map(|t| t.vertices).collect();
    diameter(&pts)
}

fn fan_bound(tris: &[AuxTriangle]) -> f64 {
    let pieces: Vec<PieceData> = tris.iter().map(triangle_piece).collect();
    decomposition_bound(&pieces, tris.iter().map(|t| t.area()).sum(), union_diameter(tris))
}

/// Bound for one element viewed as the fan of its aux triangles.
pub fn element_poincare_bound(mesh: &PolygonalMesh, element: usize) -> f64 {
    fan_bound(&build_aux_triangulation(mesh, element))
}

/// Splits an element through `z`, `z_K` and the vertex `z'` maximising the
/// angle at `z_K`, returning both halves as pieces.
fn split_pieces(mesh: &PolygonalMesh, element: usize, z: usize) -> Vec<PieceData> {
    let el = mesh.element(element);
    let tris = build_aux_triangulation(mesh, element);
    let m = el.boundary_loop.len();
    let i = el.boundary_loop.iter().position(|&v| v == z).expect("node of element");
    let c = el.kernel_center;
    let dz = mesh.position(z) - c;
    let angle = |j: usize| {
        let d = mesh.position(el.boundary_loop[j]) - c;
        dz.cross(d).atan2(dz.dot(d)).abs()
    };
    let j = (0..m).filter(|&j| j != i).max_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(b.cmp(&a))).expect("polygon");
    let beta = angle(j);
    let radius = split_piece_radius(el.kernel_radius, beta);
    // triangle e spans vertices e and e+1: the halves are i..j and j..i
    let half = |from: usize, to: usize| -> Vec<AuxTriangle> {
        let len = (to + m - from) % m;
        (0..len).map(|s| tris[(from + s) % m]).collect()
    };
    let halves = [half(i, j), half(j, i)];
    halves
        .iter()
        .map(|h| {
            // T_i is the triangle of the edge at z
            let t = if h[0].vertices[0] == mesh.position(z) { h[0] } else { h[h.len() - 1] };
            PieceData {
                area: h.iter().map(|t| t.area()).sum(),
                diameter: union_diameter(h),
                triangle_area: t.area(),
                constant: fan_bound(h),
                radius: Some(radius),
            }
        })
        .collect()
}

/// Decomposition bound for a node patch; element patches of other kinds use
/// their member elements as pieces, each linked through its largest aux triangle.
pub fn poincare_patch_bound(mesh: &PolygonalMesh, tables: &PatchTables, patch: &Patch) -> PatchPoincareBound {
    let pieces: Vec<PieceData> = match patch.kind {
        PatchKind::NodeTilde => patch.members.iter().map(|&t| triangle_piece(&tables.aux[t])).collect(),
        PatchKind::Node => patch.members.iter().flat_map(|&k| split_pieces(mesh, k, patch.anchor)).collect(),
        _ => patch
            .members
            .iter()
            .map(|&k| {
                let el = mesh.element(k);
                let tris = &tables.aux[tables.aux_offsets[k]..tables.aux_offsets[k + 1]];
                PieceData {
                    area: el.area,
                    diameter: el.diameter,
                    triangle_area: tris.iter().map(|t| t.area()).fold(0.0, f64::max),
                    constant: fan_bound(tris),
                    radius: None,
                }
            })
            .collect(),
    };
    let area = pieces.iter().map(|p| p.area).sum();
    let bound = decomposition_bound(&pieces, area, patch.diameter);
    PatchPoincareBound { kind: patch.kind, anchor: patch.anchor, pieces, area, diameter: patch.diameter, bound }
}

/// Triangles covering a patch, for quadrature over it.
pub fn patch_triangles(tables: &PatchTables, patch: &Patch) -> Vec<AuxTriangle> {
    match patch.kind {
        PatchKind::NodeTilde => patch.members.iter().map(|&t| tables.aux[t]).collect(),
        _ => patch
            .members
            .iter()
            .flat_map(|&k| tables.aux[tables.aux_offsets[k]..tables.aux_offsets[k + 1]].iter().copied())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_patches, generate_structured, BoundaryTag, Rect, StructuredKind};

    #[test]
    fn two_triangle_square() {
        let p = PieceData { area: 0.5, diameter: 2f64.sqrt(), triangle_area: 0.5, constant: CONVEX, radius: None };
        let b = decomposition_bound(&[p.clone(), p], 1.0, 2f64.sqrt());
        let expected = (8.0 * 0.5 * (1.0 / (PI * PI) + 2.0 / PI) * 2.0f64).sqrt();
        assert!((b - expected).abs() < 1e-14);
        assert!((b - 2.430).abs() < 1e-3);
    }

    #[test]
    fn straight_split_halves_radius() {
        assert!((split_piece_radius(3.0, PI) - 1.5).abs() < 1e-15);
        assert!(split_piece_radius(1.0, 0.5 * PI) > 1.0 / (1.0 + 2f64.sqrt()) - 1e-15);
    }

    #[test]
    fn node_patch_pieces_partition_the_patch() {
        let m = generate_structured(StructuredKind::LTiles, 2, Rect::unit(), |_, _| BoundaryTag::Dirichlet);
        let t = build_patches(&m);
        for p in &t.node {
            let b = poincare_patch_bound(&m, &t, p);
            assert_eq!(b.pieces.len(), 2 * p.members.len());
            let area: f64 = p.members.iter().map(|&k| m.element(k).area).sum();
            assert!((b.area - area).abs() < 1e-12);
            assert!(b.bound.is_finite() && b.bound > 0.0);
            for piece in &b.pieces {
                assert!(piece.triangle_area <= piece.area + 1e-15);
            }
        }
        for p in &t.node_tilde {
            assert!(poincare_patch_bound(&m, &t, p).bound.is_finite());
        }
    }
}
