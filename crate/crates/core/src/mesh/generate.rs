use super::{BoundaryTag, PolygonalMesh};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    Squares,
    /// Every cell split into an L-shaped element and the square filling its upper-right quadrant.
    LTiles,
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }
}

/// `n x n` structured mesh of the rectangle; `tag` classifies boundary segments.
pub fn generate_structured(kind: StructuredKind, n: usize, domain: Rect, tag: impl Fn(Point2, Point2) -> BoundaryTag) -> PolygonalMesh {
    assert!(n >= 1, "need at least one subdivision");
    let hx = (domain.x1 - domain.x0) / n as f64;
    let hy = (domain.y1 - domain.y0) / n as f64;
    let px = |i: usize, f: f64| if i == n && f == 0.0 { domain.x1 } else { domain.x0 + (i as f64 + f) * hx };
    let py = |j: usize, f: f64| if j == n && f == 0.0 { domain.y1 } else { domain.y0 + (j as f64 + f) * hy };
    let mut polys = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = |a: usize, fa: f64, b: usize, fb: f64| {
                let (ia, fa) = if fa >= 1.0 { (a + 1, fa - 1.0) } else { (a, fa) };
                let (jb, fb) = if fb >= 1.0 { (b + 1, fb - 1.0) } else { (b, fb) };
                Point2::new(px(ia, fa), py(jb, fb))
            };
            match kind {
                StructuredKind::Squares => {
                    polys.push(vec![p(i, 0.0, j, 0.0), p(i, 1.0, j, 0.0), p(i, 1.0, j, 1.0), p(i, 0.0, j, 1.0)]);
                }
                StructuredKind::LTiles => {
                    polys.push(vec![
                        p(i, 0.0, j, 0.0),
                        p(i, 0.5, j, 0.0),
                        p(i, 1.0, j, 0.0),
                        p(i, 1.0, j, 0.5),
                        p(i, 0.5, j, 0.5),
                        p(i, 0.5, j, 1.0),
                        p(i, 0.0, j, 1.0),
                        p(i, 0.0, j, 0.5),
                    ]);
                    polys.push(vec![p(i, 0.5, j, 0.5), p(i, 1.0, j, 0.5), p(i, 1.0, j, 1.0), p(i, 0.5, j, 1.0)]);
                }
            }
        }
    }
    PolygonalMesh::from_polygons(&polys, tag).expect("structured mesh is valid")
}
