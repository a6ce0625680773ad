//! Clément-type quasi-interpolation into the lowest-order space: nodal
//! values are patch means, Dirichlet nodes are set to zero.

use crate::assembly::element_quadrature;
use crate::bem::{element_bem, BemLayout, BemSettings};
use crate::error::Result;
use crate::geometry::Point2;
use crate::mesh::{BoundaryClass, PatchTables, PolygonalMesh};
use crate::quadrature::triangle_rule;

use super::poincare::patch_triangles;

/// Which node patch the means are taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationVariant {
    /// Elements containing the node.
    Standard,
    /// Aux triangles containing the node.
    Tilde,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiInterpolant {
    pub variant: InterpolationVariant,
    /// One coefficient per mesh node.
    pub coefficients: Vec<f64>,
}

/// Builds the interpolant; means use a triangle rule of the given degree.
pub fn quasi_interpolate(
    mesh: &PolygonalMesh,
    tables: &PatchTables,
    v: &dyn Fn(Point2) -> f64,
    variant: InterpolationVariant,
    degree: usize,
) -> QuasiInterpolant {
    let coefficients = (0..mesh.num_nodes())
        .map(|z| {
            if mesh.node(z).boundary_class == BoundaryClass::Dirichlet {
                return 0.0;
            }
            let patch = match variant {
                InterpolationVariant::Standard => &tables.node[z],
                InterpolationVariant::Tilde => &tables.node_tilde[z],
            };
            let (mut int, mut area) = (0.0, 0.0);
            for t in patch_triangles(tables, patch) {
                let [a, b, c] = t.vertices;
                for q in triangle_rule(a, b, c, degree) {
                    int += q.weight * v(q.point);
                    area += q.weight;
                }
            }
            int / area
        })
        .collect();
    QuasiInterpolant { variant, coefficients }
}

impl QuasiInterpolant {
    /// Value inside an element (points on `∂K` are rejected by the evaluator).
    pub fn value(&self, mesh: &PolygonalMesh, element: usize, x: Point2) -> Result<f64> {
        let bem = element_bem(&mesh.element_points(element), BemLayout::standard(1), &BemSettings::default())?;
        let (vals, _) = bem.basis_at(x, false)?;
        Ok(mesh.element(element).boundary_loop.iter().zip(&vals).map(|(&z, b)| self.coefficients[z] * b).sum())
    }

    /// `‖v - I v‖_{0,K}`.
    pub fn element_error(&self, mesh: &PolygonalMesh, element: usize, v: &dyn Fn(Point2) -> f64, degree: usize) -> Result<f64> {
        let bem = element_bem(&mesh.element_points(element), BemLayout::standard(1), &BemSettings::default())?;
        let lp = &mesh.element(element).boundary_loop;
        let mut s = 0.0;
        for q in element_quadrature(mesh, element, degree, None, 0) {
            let (vals, _) = bem.basis_at(q.point, false)?;
            let iv: f64 = lp.iter().zip(&vals).map(|(&z, b)| self.coefficients[z] * b).sum();
            s += q.weight * (v(q.point) - iv).powi(2);
        }
        Ok(s.sqrt())
    }
}

/// Ratios `‖v - I v‖_{0,K} / (h_K |v|_{1,ω_K})` with `ω_K` the element patch.
pub fn interpolation_ratios(
    mesh: &PolygonalMesh,
    tables: &PatchTables,
    interpolant: &QuasiInterpolant,
    v: &dyn Fn(Point2) -> f64,
    grad: &dyn Fn(Point2) -> Point2,
    degree: usize,
) -> Result<Vec<f64>> {
    let semi: Vec<f64> = (0..mesh.num_elements())
        .map(|k| {
            let mut s = 0.0;
            for t in patch_triangles(tables, &tables.element[k]) {
                let [a, b, c] = t.vertices;
                for q in triangle_rule(a, b, c, degree) {
                    let g = grad(q.point);
                    s += q.weight * g.dot(g);
                }
            }
            s.sqrt()
        })
        .collect();
    (0..mesh.num_elements())
        .map(|k| Ok(interpolant.element_error(mesh, k, v, degree)? / (mesh.element(k).diameter * semi[k])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_patches, generate_structured, BoundaryTag, Rect, StructuredKind};

    #[test]
    fn constants_are_reproduced_away_from_dirichlet_nodes() {
        let m = generate_structured(StructuredKind::LTiles, 2, Rect::unit(), |_, _| BoundaryTag::Neumann);
        let t = build_patches(&m);
        for variant in [InterpolationVariant::Standard, InterpolationVariant::Tilde] {
            let i = quasi_interpolate(&m, &t, &|_| 2.5, variant, 4);
            for c in &i.coefficients {
                assert!((c - 2.5).abs() < 1e-13);
            }
            for k in 0..m.num_elements() {
                assert!(i.element_error(&m, k, &|_| 2.5, 4).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_of_linear_over_two_squares() {
        let sq = |x0: f64| vec![Point2::new(x0, 0.0), Point2::new(x0 + 1.0, 0.0), Point2::new(x0 + 1.0, 1.0), Point2::new(x0, 1.0)];
        let m = PolygonalMesh::from_polygons(&[sq(0.0), sq(1.0)], |_, _| BoundaryTag::Neumann).unwrap();
        let t = build_patches(&m);
        let i = quasi_interpolate(&m, &t, &|p| p.x, InterpolationVariant::Standard, 2);
        let mid = (0..m.num_nodes()).find(|&z| m.position(z) == Point2::new(1.0, 0.0)).unwrap();
        assert!((i.coefficients[mid] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_nodes_are_zero() {
        let m = generate_structured(StructuredKind::Squares, 2, Rect::unit(), |_, _| BoundaryTag::Dirichlet);
        let t = build_patches(&m);
        let i = quasi_interpolate(&m, &t, &|_| 1.0, InterpolationVariant::Tilde, 2);
        for z in 0..m.num_nodes() {
            let expected = if m.node(z).boundary_class == BoundaryClass::Dirichlet { 0.0 } else { 1.0 };
            assert!((i.coefficients[z] - expected).abs() < 1e-13);
        }
    }
}
