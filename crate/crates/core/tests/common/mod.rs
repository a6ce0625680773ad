//! Mesh corpus and geometric checks shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bemfem::geometry::{contains_point, segment_in_polygon, Point2};
use bemfem::mesh::io::read_mesh;
use bemfem::mesh::{
    build_aux_triangulation, generate_structured, glue_elements, regularity_report, split_elements, BoundaryTag, PolygonalMesh, Rect,
    RegularityLimits, StructuredKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub name: String,
    pub mesh: PolygonalMesh,
    /// Exact area of the domain.
    pub area: f64,
}

fn fixture(name: impl Into<String>, mesh: PolygonalMesh, area: f64) -> Fixture {
    Fixture { name: name.into(), mesh, area }
}

pub fn data_meshes() -> Vec<Fixture> {
    [
        ("lshape", include_str!("../data/lshape.polymesh"), 3.0),
        ("mixed", include_str!("../data/mixed.polymesh"), 1.0),
        ("star", include_str!("../data/star.polymesh"), 2.0),
    ]
    .into_iter()
    .map(|(n, t, a)| fixture(n, read_mesh(t).expect("corpus mesh parses"), a))
    .collect()
}

pub fn dirichlet(_: Point2, _: Point2) -> BoundaryTag {
    BoundaryTag::Dirichlet
}

pub fn squares(n: usize) -> PolygonalMesh {
    generate_structured(StructuredKind::Squares, n, Rect::unit(), dirichlet)
}

pub fn l_tiles(n: usize) -> PolygonalMesh {
    generate_structured(StructuredKind::LTiles, n, Rect::unit(), dirichlet)
}

pub fn generated() -> Vec<Fixture> {
    let mut out = Vec::new();
    for n in [1, 2, 4, 8] {
        out.push(fixture(format!("squares{n}"), squares(n), 1.0));
    }
    for n in [1, 2, 4, 8] {
        out.push(fixture(format!("ltiles{n}"), l_tiles(n), 1.0));
    }
    let big = generate_structured(StructuredKind::Squares, 4, Rect::new(-1.0, -1.0, 1.0, 1.0), dirichlet);
    out.push(fixture("jump4", big, 4.0));
    out
}

/// Splits a random third of the elements, `rounds` times. Returns every
/// intermediate mesh and the sibling pairs of the last round.
pub fn random_refinements(base: &Fixture, seed: u64, rounds: usize) -> (Vec<Fixture>, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mesh = base.mesh.clone();
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    for r in 0..rounds {
        let mut ids: Vec<usize> = (0..mesh.num_elements()).filter(|_| rng.gen_bool(0.35)).collect();
        if ids.is_empty() {
            ids.push(rng.gen_range(0..mesh.num_elements()));
        }
        let (m, records) = split_elements(&mesh, &ids).expect("split");
        pairs = records.iter().map(|r| (r.child_a, r.child_b)).collect();
        mesh = m;
        out.push(fixture(format!("{}-refined{}", base.name, r + 1), mesh.clone(), base.area));
    }
    (out, pairs)
}

/// Glues sibling pairs back together, remapping ids after each glue.
pub fn coarsen_pairs(mesh: &PolygonalMesh, pairs: &[(usize, usize)]) -> PolygonalMesh {
    let mut mesh = mesh.clone();
    let mut pending = pairs.to_vec();
    while let Some((a, b)) = pending.pop() {
        let g = glue_elements(&mesh, a, b).expect("glue siblings");
        pending = pending.iter().map(|&(x, y)| (g.element_map[x].unwrap(), g.element_map[y].unwrap())).collect();
        mesh = g.mesh;
    }
    mesh
}

/// Generated, data, refined and coarsened meshes.
pub fn corpus() -> Vec<Fixture> {
    let mut out = Vec::new();
    let mut bases = generated();
    bases.extend(data_meshes());
    for (i, b) in bases.iter().enumerate() {
        let (refined, pairs) = random_refinements(b, 11 + i as u64, 3);
        let last = refined.last().expect("rounds > 0");
        let coarse = coarsen_pairs(&last.mesh, &pairs);
        out.push(fixture(format!("{}-coarsened", b.name), coarse, b.area));
        out.extend(refined);
    }
    bases.extend(out);
    bases
}

/// Violations of the geometric mesh invariants, empty when all hold.
pub fn geometry_violations(f: &Fixture) -> Vec<String> {
    let mesh = &f.mesh;
    let mut bad = Vec::new();
    if let Err(e) = mesh.check_consistency() {
        bad.push(format!("consistency: {e}"));
    }
    let total: f64 = mesh.elements().iter().map(|e| e.area).sum();
    if (total - f.area).abs() > 1e-10 * f.area {
        bad.push(format!("area {total} != {}", f.area));
    }
    for e in mesh.edges() {
        let n = e.incident_elements.len();
        if n == 0 || n > 2 {
            bad.push(format!("edge {} has {n} elements", e.id));
        }
    }
    let limits = RegularityLimits::default();
    let rep = regularity_report(mesh, &limits);
    let bound = 2.0 * rep.sigma_max * rep.c_max;
    for el in mesh.elements() {
        let r = &rep.elements[el.id];
        for t in build_aux_triangulation(mesh, el.id) {
            let he = mesh.edge(t.edge).length;
            if t.area() < 0.5 * he * el.kernel_radius * (1.0 - 1e-12) {
                bad.push(format!("element {}: aux triangle of edge {} too small", el.id, t.edge));
            }
        }
        let alpha = (PI / 3.0).min((1.0 / r.sigma).asin());
        if (alpha - r.alpha).abs() > 1e-14 {
            bad.push(format!("element {}: alpha {} != {alpha}", el.id, r.alpha));
        }
        if let Some(msg) = isosceles_violation(mesh, el.id, alpha) {
            bad.push(msg);
        }
        if el.edges.len() != el.boundary_loop.len() || el.edges.len() as f64 > bound {
            bad.push(format!("element {}: {} edges vs bound {bound}", el.id, el.edges.len()));
        }
    }
    bad
}

/// The isosceles triangle with apex angle `alpha` at every vertex, pointing
/// to the kernel centre with height `|z - z_K|`, lies inside the element.
fn isosceles_violation(mesh: &PolygonalMesh, element: usize, alpha: f64) -> Option<String> {
    let el = mesh.element(element);
    let poly = mesh.element_points(element);
    for z in &poly {
        let d = el.kernel_center - *z;
        let len = d.norm();
        let perp = Point2::new(-d.y, d.x) * ((0.5 * alpha).tan());
        for b in [el.kernel_center + perp, el.kernel_center - perp] {
            if !contains_point(&poly, b) || !segment_in_polygon(&poly, *z, b) {
                return Some(format!("element {element}: isosceles triangle at {z:?} (height {len}) leaves the element"));
            }
        }
    }
    None
}

/// Random polygon star-shaped with respect to a disc around `centre`.
pub fn random_star(rng: &mut impl Rng, centre: Point2, scale: f64) -> Vec<Point2> {
    let n = rng.gen_range(5..=10);
    let step = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| {
            let a = step * (i as f64 + rng.gen_range(-0.3..0.3));
            let r = scale * rng.gen_range(0.55..1.0);
            centre + Point2::new(a.cos(), a.sin()) * r
        })
        .collect()
}

/// Random interior points at distance at least `margin · h` from the boundary.
pub fn interior_points(rng: &mut impl Rng, poly: &[Point2], count: usize, margin: f64) -> Vec<Point2> {
    let h = bemfem::geometry::diameter(poly);
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut out = Vec::new();
    while out.len() < count {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if contains_point(poly, p) && bemfem::geometry::boundary_distance(poly, p) > margin * h {
            out.push(p);
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Re (x + iy)^d` or `Im (x + iy)^d` about `centre`.
pub fn harmonic(d: usize, real: bool, centre: Point2) -> bemfem::poly::Poly2 {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let mut terms = Vec::new();
    for j in 0..=d {
        if (j % 2 == 0) != real {
            continue;
        }
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((d - j, j, sign * binom(d, j)));
    }
    if terms.is_empty() {
        terms.push((0, 0, 0.0));
    }
    shift(&bemfem::poly::Poly2::from_terms(&terms), centre)
}

/// `p(x - c)` expanded in monomials.
pub fn shift(p: &bemfem::poly::Poly2, c: Point2) -> bemfem::poly::Poly2 {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    let mut terms = Vec::new();
    for (i, j, v) in p.terms() {
        for a in 0..=i {
            for b in 0..=j {
                let c = v * binom(i, a) * binom(j, b) * (-c.x).powi((i - a) as i32) * (-c.y).powi((j - b) as i32);
                terms.push((a, b, c));
            }
        }
    }
    bemfem::poly::Poly2::from_terms(&terms)
}

/// All harmonic polynomials of degree `<= k` (the constant included).
pub fn harmonic_basis(k: usize, centre: Point2) -> Vec<bemfem::poly::Poly2> {
    let mut out = vec![bemfem::poly::Poly2::constant(1.0)];
    for d in 1..=k {
        out.push(harmonic(d, true, centre));
        out.push(harmonic(d, false, centre));
    }
    out
}

pub fn unit_square_loop(side: f64, origin: Point2) -> Vec<Point2> {
    [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].iter().map(|&(x, y)| origin + Point2::new(x, y) * side).collect()
}

pub fn l_shape_loop() -> Vec<Point2> {
    [(0.0, 0.0), (1.0, 0.0), (1.0, 0.5), (0.5, 0.5), (0.5, 1.0), (0.0, 1.0)].iter().map(|&(x, y)| Point2::new(x, y)).collect()
}

/// Largest deviation of the BEM Neumann trace of `q` from `∂_n q` at Gauss
/// points of every edge, relative to `max(1, max |∂_n q|)`, and the
/// `L2(∂K)` error.
pub fn neumann_error(poly: &[Point2], k: usize, layout: bemfem::bem::BemLayout, q: &bemfem::poly::Poly2) -> (f64, f64) {
    let bem = bemfem::bem::element_bem(poly, layout, &bemfem::bem::BemSettings::default()).expect("element operator");
    let trace = bemfem::assembly::polynomial_trace(poly, k, q);
    let flux = bem.neumann(trace.as_slice());
    let g = bemfem::quadrature::gauss(12);
    let m = poly.len();
    let (mut max_err, mut max_val, mut l2) = (0.0f64, 1.0f64, 0.0);
    for e in 0..m {
        let (a, b) = (poly[e], poly[(e + 1) % m]);
        let d = b - a;
        let len = d.norm();
        let n = Point2::new(d.y, -d.x) * (1.0 / len);
        for (t, w) in g.nodes.iter().zip(&g.weights) {
            let x = a.lerp(b, 0.5 * (t + 1.0));
            let (gx, gy) = q.grad(x.x, x.y);
            let exact = gx * n.x + gy * n.y;
            let approx = bemfem::assembly::flux_series_at(&flux, layout, e, *t);
            max_err = max_err.max((exact - approx).abs());
            max_val = max_val.max(exact.abs());
            l2 += 0.5 * len * w * (exact - approx).powi(2);
        }
    }
    (max_err / max_val, l2.sqrt())
}

/// Lower estimate of `C_P(ω)` from random test functions:
/// the largest `‖v - mean‖_0 / (h_ω |v|_1)` over `samples` plane waves and linear functions.
pub fn monte_carlo_poincare(tris: &[bemfem::mesh::AuxTriangle], h: f64, rng: &mut impl Rng, samples: usize) -> f64 {
    let pts: Vec<bemfem::quadrature::QuadPoint> = tris
        .iter()
        .flat_map(|t| bemfem::quadrature::triangle_rule(t.vertices[0], t.vertices[1], t.vertices[2], 14))
        .collect();
    let mut best: f64 = 0.0;
    for s in 0..samples {
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let dir = Point2::new(a.cos(), a.sin());
        let (freq, phase) = if s % 4 == 0 { (0.0, 0.0) } else { (rng.gen_range(0.2..8.0) / h, rng.gen_range(0.0..std::f64::consts::TAU)) };
        let (v, g): (Box<dyn Fn(Point2) -> f64>, Box<dyn Fn(Point2) -> f64>) = if freq == 0.0 {
            (Box::new(move |x: Point2| dir.dot(x)), Box::new(|_| 1.0))
        } else {
            (Box::new(move |x: Point2| (freq * dir.dot(x) + phase).sin()), Box::new(move |x: Point2| freq * (freq * dir.dot(x) + phase).cos()))
        };
        let area: f64 = pts.iter().map(|q| q.weight).sum();
        let mean = pts.iter().map(|q| q.weight * v(q.point)).sum::<f64>() / area;
        let l2 = pts.iter().map(|q| q.weight * (v(q.point) - mean).powi(2)).sum::<f64>().sqrt();
        let h1 = pts.iter().map(|q| q.weight * g(q.point).powi(2)).sum::<f64>().sqrt();
        if h1 > 0.0 {
            best = best.max(l2 / (h * h1));
        }
    }
    best
}
