//! Planar points and polygon primitives: areas, simplicity, the visibility
//! kernel and its largest inscribed disc.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::GeometryError;

/// Relative tolerance used by the polygon predicates.
pub const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self) * t
    }

    pub fn midpoint(self, o: Self) -> Self {
        Self::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    /// Lexicographic comparison (x first, then y).
    pub fn lex_cmp(self, o: Self) -> std::cmp::Ordering {
        self.x
            .total_cmp(&o.x)
            .then_with(|| self.y.total_cmp(&o.y))
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Shoelace area, positive for counter-clockwise loops.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * s
}

pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point2::new(cx / (3.0 * a), cy / (3.0 * a))
}

pub fn diameter(poly: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

fn bbox_scale(poly: &[Point2]) -> f64 {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in poly {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point2, a: Point2, b: Point2, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

/// Closed segments `[a,b]` and `[c,d]` intersect (touching included).
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> bool {
    let scale = (b - a).norm().max((d - c).norm());
    let t = tol * scale;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let s = scale * scale * tol;
    if ((o1 > s && o2 < -s) || (o1 < -s && o2 > s)) && ((o3 > s && o4 < -s) || (o3 < -s && o4 > s))
    {
        return true;
    }
    on_segment(c, a, b, t) || on_segment(d, a, b, t) || on_segment(a, c, d, t) || on_segment(b, c, d, t)
}

/// A loop is simple when non-adjacent edges are disjoint and adjacent edges
/// only share their common vertex. Collinear consecutive vertices are allowed.
pub fn is_simple(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let tol = GEOM_EPS * 1e2;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.dist(b) <= GEOM_EPS * bbox_scale(poly) {
            return false;
        }
        for j in i + 1..n {
            let c = poly[j];
            let d = poly[(j + 1) % n];
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared vertex; reject folding back along the same line
                let (p, q, r) = if j == i + 1 { (a, b, d) } else { (c, a, b) };
                let u = q - p;
                let v = r - q;
                if u.cross(v).abs() <= tol * u.norm() * v.norm() && u.dot(v) < 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// Even-odd point containment; points on the boundary count as inside.
pub fn contains_point(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let tol = GEOM_EPS * bbox_scale(poly);
    for i in 0..n {
        if on_segment(p, poly[i], poly[(i + 1) % n], tol) {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the polygon boundary.
pub fn boundary_distance(poly: &[Point2], p: Point2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Whether the closed segment `[a,b]` stays inside the closed polygon.
pub fn segment_in_polygon(poly: &[Point2], a: Point2, b: Point2) -> bool {
    if !contains_point(poly, a) || !contains_point(poly, b) {
        return false;
    }
    let n = poly.len();
    let scale = bbox_scale(poly);
    let tol = GEOM_EPS * 1e2;
    // any proper crossing of a boundary edge leaves the polygon
    for i in 0..n {
        let c = poly[i];
        let d = poly[(i + 1) % n];
        let o1 = orient(a, b, c);
        let o2 = orient(a, b, d);
        let o3 = orient(c, d, a);
        let o4 = orient(c, d, b);
        let s = tol * scale * scale;
        if ((o1 > s && o2 < -s) || (o1 < -s && o2 > s)) && ((o3 > s && o4 < -s) || (o3 < -s && o4 > s))
        {
            return false;
        }
    }
    // touching vertices split the segment; test the midpoints of the pieces
    let mut ts = vec![0.0, 1.0];
    let d = b - a;
    let l2 = d.dot(d);
    if l2 > 0.0 {
        for v in poly {
            if on_segment(*v, a, b, tol * scale) {
                ts.push(((*v - a).dot(d) / l2).clamp(0.0, 1.0));
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.windows(2)
        .filter(|w| w[1] - w[0] > 1e-14)
        .all(|w| contains_point(poly, a.lerp(b, 0.5 * (w[0] + w[1]))))
}

/// Validates a boundary loop: at least three finite vertices, simple, CCW.
pub fn validate_loop(poly: &[Point2]) -> Result<(), GeometryError> {
    if poly.len() < 3 || poly.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::InvalidPolygon("fewer than three finite vertices".into()));
    }
    if !is_simple(poly) {
        return Err(GeometryError::InvalidPolygon("self-intersecting boundary".into()));
    }
    if signed_area(poly) <= 0.0 {
        return Err(GeometryError::InvalidPolygon("boundary is not counter-clockwise".into()));
    }
    Ok(())
}

/// Visibility kernel: intersection of the inner half-planes of all boundary
/// segments. Returns an empty vector when the polygon is not star-shaped with
/// respect to any disc of positive radius.
pub fn polygon_kernel(poly: &[Point2]) -> Result<Vec<Point2>, GeometryError> {
    validate_loop(poly)?;
    let scale = bbox_scale(poly);
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in poly {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let mut region = vec![
        Point2::new(xmin, ymin),
        Point2::new(xmax, ymin),
        Point2::new(xmax, ymax),
        Point2::new(xmin, ymax),
    ];
    let n = poly.len();
    let eps = GEOM_EPS * scale;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let dir = (b - a) * (1.0 / a.dist(b));
        region = clip_half_plane(&region, a, dir, eps);
        if region.len() < 3 {
            return Ok(Vec::new());
        }
    }
    if signed_area(&region) <= GEOM_EPS * scale * scale {
        return Ok(Vec::new());
    }
    Ok(region)
}

fn clip_half_plane(region: &[Point2], a: Point2, dir: Point2, eps: f64) -> Vec<Point2> {
    let side = |p: Point2| dir.cross(p - a);
    let n = region.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let p = region[i];
        let q = region[(i + 1) % n];
        let sp = side(p);
        let sq = side(q);
        let p_in = sp >= -eps;
        let q_in = sq >= -eps;
        if p_in {
            out.push(p);
        }
        if (p_in && sq < -eps) || (!p_in && q_in && sq > eps) {
            let t = sp / (sp - sq);
            out.push(p.lerp(q, t));
        }
    }
    // drop duplicates produced by touching vertices
    let mut dedup: Vec<Point2> = Vec::with_capacity(out.len());
    for p in out {
        if dedup.last().is_none_or(|l: &Point2| l.dist(p) > eps) {
            dedup.push(p);
        }
    }
    while dedup.len() > 1 && dedup[0].dist(*dedup.last().unwrap()) <= eps {
        dedup.pop();
    }
    dedup
}

/// Largest disc inside the visibility kernel (Chebyshev centre of the
/// half-plane system spanned by the boundary lines).
///
/// If the optimal centre is not unique the optimal set is a segment; its
/// midpoint is returned.
pub fn inscribed_circle(poly: &[Point2]) -> Result<(Point2, f64), GeometryError> {
    if poly.len() < 3 {
        return Err(GeometryError::NotStarShaped);
    }
    let scale = bbox_scale(poly);
    // distinct supporting lines (unit direction, anchor)
    let mut lines: Vec<(Point2, f64)> = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let len = a.dist(b);
        if len <= GEOM_EPS * scale {
            continue;
        }
        let d = (b - a) * (1.0 / len);
        let off = d.cross(a);
        let dup = lines
            .iter()
            .any(|(e, o)| e.dot(d) > 1.0 - 1e-12 && (o - off).abs() <= 1e-12 * scale);
        if !dup {
            lines.push((d, off));
        }
    }
    // constraint: d.cross(p) - off >= r  <=>  -d.y px + d.x py - r >= off
    let m = lines.len();
    let feas_tol = 1e-10 * scale;
    let mut best_r = f64::NEG_INFINITY;
    let mut cands: Vec<(Point2, f64)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [lines[i], lines[j], lines[k]];
                let Some((p, r)) = solve_three(&rows) else { continue };
                if r <= 0.0 {
                    continue;
                }
                let ok = lines.iter().all(|(d, off)| d.cross(p) - off - r >= -feas_tol);
                if ok {
                    best_r = best_r.max(r);
                    cands.push((p, r));
                }
            }
        }
    }
    if !best_r.is_finite() || best_r <= GEOM_EPS * scale {
        return Err(GeometryError::NotStarShaped);
    }
    let opt: Vec<Point2> = cands
        .iter()
        .filter(|(_, r)| *r >= best_r - 1e-10 * scale)
        .map(|(p, _)| *p)
        .collect();
    let lo = *opt.iter().min_by(|a, b| a.lex_cmp(**b)).unwrap();
    let hi = *opt.iter().max_by(|a, b| a.lex_cmp(**b)).unwrap();
    let mut center = lo.midpoint(hi);
    // exact zeros print nicer and keep symmetric fixtures symmetric
    for c in [&mut center.x, &mut center.y] {
        if c.abs() < 1e-15 * scale {
            *c = 0.0;
        }
    }
    Ok((center, best_r))
}

fn solve_three(rows: &[(Point2, f64); 3]) -> Option<(Point2, f64)> {
    // [-dy dx -1] [px py r]^T = off
    let a = rows.map(|(d, _)| [-d.y, d.x, -1.0]);
    let b = rows.map(|(_, o)| o);
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det(&a);
    if d0.abs() < 1e-12 {
        return None;
    }
    let mut sol = [0.0; 3];
    for (c, s) in sol.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *s = det(&m) / d0;
    }
    Some((Point2::new(sol[0], sol[1]), sol[2]))
}
