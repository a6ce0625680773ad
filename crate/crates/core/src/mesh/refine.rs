//! Splitting elements along chords and gluing neighbours back together.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{edge_key, element_geometry, BoundaryTag, ElementGeometry, PolygonalMesh};
use crate::error::MeshError;
use crate::geometry::{point_segment_distance, signed_area, Point2};

/// Outcome of one split: `child_a` keeps the parent id, `child_b` is new.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRecord {
    pub parent: usize,
    pub child_a: usize,
    pub child_b: usize,
    /// Nodes created at edge midpoints.
    pub new_nodes: Vec<usize>,
}

/// Mutable primary mesh data used while refining.
struct Work {
    positions: Vec<Point2>,
    loops: Vec<Vec<usize>>,
    tags: HashMap<(usize, usize), BoundaryTag>,
    geoms: Vec<Option<ElementGeometry>>,
    edge_elems: HashMap<(usize, usize), Vec<usize>>,
}

impl Work {
    fn from_mesh(mesh: &PolygonalMesh) -> Self {
        let loops = mesh.loops();
        let mut edge_elems: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, lp) in loops.iter().enumerate() {
            for e in 0..lp.len() {
                edge_elems.entry(edge_key(lp[e], lp[(e + 1) % lp.len()])).or_default().push(k);
            }
        }
        Self {
            positions: mesh.positions(),
            loops,
            tags: mesh.boundary_tags().clone(),
            geoms: mesh.geometries(),
            edge_elems,
        }
    }

    fn detach(&mut self, k: usize) {
        let lp = &self.loops[k];
        for e in 0..lp.len() {
            let key = edge_key(lp[e], lp[(e + 1) % lp.len()]);
            if let Some(v) = self.edge_elems.get_mut(&key) {
                v.retain(|&x| x != k);
                if v.is_empty() {
                    self.edge_elems.remove(&key);
                }
            }
        }
    }

    fn attach(&mut self, k: usize) {
        let lp = &self.loops[k];
        for e in 0..lp.len() {
            self.edge_elems.entry(edge_key(lp[e], lp[(e + 1) % lp.len()])).or_default().push(k);
        }
    }

    fn finish(self) -> Result<PolygonalMesh, MeshError> {
        PolygonalMesh::with_geometry(self.positions, self.loops, self.tags, Some(self.geoms))
    }

    /// Inserts node `m` between `a` and `b` in every loop using that edge.
    fn insert_on_edge(&mut self, a: usize, b: usize, m: usize) {
        let key = edge_key(a, b);
        let users = self.edge_elems.remove(&key).unwrap_or_default();
        for &k in &users {
            let lp = &mut self.loops[k];
            let n = lp.len();
            let pos = (0..n)
                .find(|&i| edge_key(lp[i], lp[(i + 1) % n]) == key)
                .expect("edge present in loop");
            lp.insert(pos + 1, m);
            self.edge_elems.entry(edge_key(a, m)).or_default().push(k);
            self.edge_elems.entry(edge_key(m, b)).or_default().push(k);
        }
        if let Some(t) = self.tags.remove(&key) {
            self.tags.insert(edge_key(a, m), t);
            self.tags.insert(edge_key(m, b), t);
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    ra: usize,
    rb: usize,
    area_diff: f64,
    length: f64,
    a: Point2,
    b: Point2,
}

fn lex_pair(c: &Candidate) -> (Point2, Point2) {
    if c.a.lex_cmp(c.b) == Ordering::Greater {
        (c.b, c.a)
    } else {
        (c.a, c.b)
    }
}

fn child_ring(ring: &[Point2], from: usize, to: usize) -> Vec<usize> {
    // ring indices from `from` to `to` (cyclic), keeping only vertices in between
    let n = ring.len();
    let mut out = vec![from];
    let mut i = (from + 1) % n;
    while i != to {
        if i % 2 == 0 {
            out.push(i);
        }
        i = (i + 1) % n;
    }
    out.push(to);
    out
}

/// Chooses the splitting chord of a loop. Returns ring indices into the
/// sequence `v0, mid(v0 v1), v1, mid(v1 v2), ...`.
fn choose_chord(pts: &[Point2], geom: &ElementGeometry) -> Option<(usize, usize, ElementGeometry, ElementGeometry)> {
    let m = pts.len();
    let ring: Vec<Point2> = (0..2 * m)
        .map(|r| if r % 2 == 0 { pts[r / 2] } else { pts[r / 2].midpoint(pts[(r / 2 + 1) % m]) })
        .collect();
    let area_tol = 1e-12 * geom.area;
    let mut near = Vec::new();
    let mut all = Vec::new();
    for ra in 0..2 * m {
        for rb in ra + 2..2 * m {
            if ra == 0 && rb == 2 * m - 1 {
                continue;
            }
            let ia = child_ring(&ring, ra, rb);
            let ib = child_ring(&ring, rb, ra);
            if ia.len() < 3 || ib.len() < 3 {
                continue;
            }
            let pa: Vec<Point2> = ia.iter().map(|&r| ring[r]).collect();
            let pb: Vec<Point2> = ib.iter().map(|&r| ring[r]).collect();
            let (aa, ab) = (signed_area(&pa), signed_area(&pb));
            if aa <= area_tol || ab <= area_tol || (aa + ab - geom.area).abs() > 1e-9 * geom.area {
                continue;
            }
            let c = Candidate { ra, rb, area_diff: (aa - ab).abs(), length: ring[ra].dist(ring[rb]), a: ring[ra], b: ring[rb] };
            if point_segment_distance(geom.center, c.a, c.b) <= 0.25 * geom.radius {
                near.push(c.clone());
            }
            all.push(c);
        }
    }
    let tol = 1e-9 * geom.area;
    let ltol = 1e-9 * geom.diameter;
    near.sort_by(|x, y| {
        if (x.area_diff - y.area_diff).abs() > tol {
            return x.area_diff.total_cmp(&y.area_diff);
        }
        if (x.length - y.length).abs() > ltol {
            return x.length.total_cmp(&y.length);
        }
        let (xa, xb) = lex_pair(x);
        let (ya, yb) = lex_pair(y);
        xa.lex_cmp(ya).then(xb.lex_cmp(yb))
    });
    let children = |c: &Candidate| -> Option<(ElementGeometry, ElementGeometry)> {
        let pa: Vec<Point2> = child_ring(&ring, c.ra, c.rb).iter().map(|&r| ring[r]).collect();
        let pb: Vec<Point2> = child_ring(&ring, c.rb, c.ra).iter().map(|&r| ring[r]).collect();
        Some((element_geometry(&pa).ok()?, element_geometry(&pb).ok()?))
    };
    for c in &near {
        if let Some((ga, gb)) = children(c) {
            return Some((c.ra, c.rb, ga, gb));
        }
    }
    // fallback: the chord with the best-shaped pair of children
    let mut best: Option<(f64, usize, usize, ElementGeometry, ElementGeometry)> = None;
    for c in &all {
        if let Some((ga, gb)) = children(c) {
            let score = ga.radius.min(gb.radius);
            if best.as_ref().map_or(true, |b| score > b.0 * (1.0 + 1e-12)) {
                best = Some((score, c.ra, c.rb, ga, gb));
            }
        }
    }
    best.map(|(_, ra, rb, ga, gb)| (ra, rb, ga, gb))
}

fn split_in(work: &mut Work, id: usize) -> Result<SplitRecord, MeshError> {
    let lp = work.loops[id].clone();
    let m = lp.len();
    let pts: Vec<Point2> = lp.iter().map(|&v| work.positions[v]).collect();
    let geom = match work.geoms[id] {
        Some(g) => g,
        None => element_geometry(&pts).map_err(|source| MeshError::Element { element: id, source })?,
    };
    let (ra, rb, ga, gb) = choose_chord(&pts, &geom).ok_or(MeshError::NoAdmissibleChord(id))?;
    // ring index -> node id, creating midpoint nodes on demand
    let mut new_nodes = Vec::new();
    let mut node_at = |r: usize, work: &mut Work| -> usize {
        if r % 2 == 0 {
            return lp[r / 2];
        }
        let (a, b) = (lp[r / 2], lp[(r / 2 + 1) % m]);
        work.positions.push(work.positions[a].midpoint(work.positions[b]));
        let node = work.positions.len() - 1;
        work.insert_on_edge(a, b, node);
        new_nodes.push(node);
        node
    };
    // parent loop is refreshed after midpoint insertion
    let na = node_at(ra, work);
    let nb = node_at(rb, work);
    let lp = work.loops[id].clone();
    let n = lp.len();
    let ia = lp.iter().position(|&v| v == na).expect("chord endpoint in loop");
    let ib = lp.iter().position(|&v| v == nb).expect("chord endpoint in loop");
    let walk = |from: usize, to: usize| -> Vec<usize> {
        let mut out = vec![lp[from]];
        let mut i = from;
        while i != to {
            i = (i + 1) % n;
            out.push(lp[i]);
        }
        out
    };
    let child_a = walk(ia, ib);
    let child_b = walk(ib, ia);
    work.detach(id);
    work.loops[id] = child_a;
    work.geoms[id] = Some(ga);
    work.attach(id);
    work.loops.push(child_b);
    work.geoms.push(Some(gb));
    let new_id = work.loops.len() - 1;
    work.attach(new_id);
    Ok(SplitRecord { parent: id, child_a: id, child_b: new_id, new_nodes })
}

/// Splits one element into two star-shaped children.
pub fn split_element(mesh: &PolygonalMesh, id: usize) -> Result<(PolygonalMesh, SplitRecord), MeshError> {
    let (m, mut r) = split_elements(mesh, &[id])?;
    Ok((m, r.remove(0)))
}

/// Splits the given elements (processed in ascending id order).
pub fn split_elements(mesh: &PolygonalMesh, ids: &[usize]) -> Result<(PolygonalMesh, Vec<SplitRecord>), MeshError> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if let Some(&bad) = ids.iter().find(|&&k| k >= mesh.num_elements()) {
        return Err(MeshError::UnknownElement(bad));
    }
    let mut work = Work::from_mesh(mesh);
    let mut records = Vec::with_capacity(ids.len());
    for id in ids {
        records.push(split_in(&mut work, id)?);
    }
    Ok((work.finish()?, records))
}

/// Result of gluing two elements.
#[derive(Debug, Clone)]
pub struct GlueResult {
    pub mesh: PolygonalMesh,
    /// Id of the merged element in the new mesh.
    pub element: usize,
    /// Old element id -> new id (`None` for the absorbed element).
    pub element_map: Vec<Option<usize>>,
    /// Old node id -> new id (`None` for removed nodes).
    pub node_map: Vec<Option<usize>>,
}

fn is_straight(prev: Point2, p: Point2, next: Point2) -> bool {
    let d1 = p - prev;
    let d2 = next - p;
    let scale = d1.norm() * d2.norm();
    d1.cross(d2).abs() <= 1e-12 * scale && d1.dot(d2) > 0.0
}

/// Merges two elements sharing at least one edge. Endpoints of the removed
/// edges that end up as straight vertices are dropped from every loop.
pub fn glue_elements(mesh: &PolygonalMesh, id1: usize, id2: usize) -> Result<GlueResult, MeshError> {
    let ne = mesh.num_elements();
    for id in [id1, id2] {
        if id >= ne {
            return Err(MeshError::UnknownElement(id));
        }
    }
    if id1 == id2 {
        return Err(MeshError::NotAdjacent(id1, id2));
    }
    let l1 = mesh.element(id1).boundary_loop.clone();
    let l2 = mesh.element(id2).boundary_loop.clone();
    let directed = |lp: &[usize]| -> Vec<(usize, usize)> { (0..lp.len()).map(|i| (lp[i], lp[(i + 1) % lp.len()])).collect() };
    let d1 = directed(&l1);
    let d2 = directed(&l2);
    let shared: Vec<(usize, usize)> = d1.iter().copied().filter(|&(a, b)| d2.contains(&(b, a))).collect();
    if shared.is_empty() {
        return Err(MeshError::NotAdjacent(id1, id2));
    }
    let keep: Vec<(usize, usize)> = d1
        .iter()
        .copied()
        .filter(|&(a, b)| !shared.contains(&(a, b)))
        .chain(d2.iter().copied().filter(|&(a, b)| !shared.contains(&(b, a))))
        .collect();
    let mut next: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in &keep {
        if next.insert(a, b).is_some() {
            return Err(MeshError::UnionNotStarShaped(id1, id2));
        }
    }
    // single cycle starting at the first surviving edge of the first loop
    let start = keep[0].0;
    let mut union = vec![start];
    let mut cur = next[&start];
    while cur != start {
        union.push(cur);
        cur = *next.get(&cur).ok_or(MeshError::UnionNotStarShaped(id1, id2))?;
        if union.len() > keep.len() {
            return Err(MeshError::UnionNotStarShaped(id1, id2));
        }
    }
    if union.len() != keep.len() {
        return Err(MeshError::UnionNotStarShaped(id1, id2));
    }
    let positions = mesh.positions();
    let mut loops = mesh.loops();
    let mut tags = mesh.boundary_tags().clone();
    let (keep_id, drop_id) = if id1 < id2 { (id1, id2) } else { (id2, id1) };
    loops[keep_id] = union;
    loops[drop_id].clear();
    // candidates: endpoints of the removed edges
    let mut endpoints: Vec<usize> = shared.iter().flat_map(|&(a, b)| [a, b]).collect();
    endpoints.sort_unstable();
    endpoints.dedup();
    for z in endpoints {
        let users: Vec<usize> = (0..loops.len()).filter(|&k| loops[k].contains(&z)).collect();
        if users.is_empty() || users.len() > 2 {
            continue;
        }
        let mut ok = true;
        let mut pairs = Vec::new();
        for &k in &users {
            let lp = &loops[k];
            let n = lp.len();
            let i = lp.iter().position(|&v| v == z).expect("node in loop");
            let (p, q) = (lp[(i + n - 1) % n], lp[(i + 1) % n]);
            if n <= 3 || !is_straight(positions[p], positions[z], positions[q]) {
                ok = false;
                break;
            }
            pairs.push((p, q));
        }
        if !ok {
            continue;
        }
        let (p, q) = pairs[0];
        let boundary = users.len() == 1;
        if boundary {
            let t1 = tags.get(&edge_key(p, z)).copied().unwrap_or_default();
            let t2 = tags.get(&edge_key(z, q)).copied().unwrap_or_default();
            if t1 != t2 {
                continue;
            }
            tags.remove(&edge_key(p, z));
            tags.remove(&edge_key(z, q));
            tags.insert(edge_key(p, q), t1);
        }
        for &k in &users {
            loops[k].retain(|&v| v != z);
        }
    }
    // compact element and node ids
    let mut element_map = vec![None; ne];
    let mut new_loops = Vec::with_capacity(ne - 1);
    for (k, lp) in loops.into_iter().enumerate() {
        if k != drop_id {
            element_map[k] = Some(new_loops.len());
            new_loops.push(lp);
        }
    }
    let mut used = vec![false; positions.len()];
    for lp in &new_loops {
        for &v in lp {
            used[v] = true;
        }
    }
    let mut node_map = vec![None; positions.len()];
    let mut new_pos = Vec::new();
    for (v, p) in positions.iter().enumerate() {
        if used[v] {
            node_map[v] = Some(new_pos.len());
            new_pos.push(*p);
        }
    }
    for lp in &mut new_loops {
        for v in lp.iter_mut() {
            *v = node_map[*v].expect("used node");
        }
    }
    // canonical start: smallest node id
    let lp = &mut new_loops[element_map[keep_id].expect("kept element")];
    let start = (0..lp.len()).min_by_key(|&i| lp[i]).unwrap_or(0);
    lp.rotate_left(start);
    let new_tags = tags
        .into_iter()
        .filter_map(|((a, b), t)| Some((edge_key(node_map[a]?, node_map[b]?), t)))
        .collect();
    let mut geoms = mesh.geometries();
    geoms.remove(drop_id);
    let element = element_map[keep_id].expect("kept element");
    geoms[element] = None;
    let union_pts: Vec<Point2> = new_loops[element].iter().map(|&v| new_pos[v]).collect();
    let g = element_geometry(&union_pts).map_err(|_| MeshError::UnionNotStarShaped(id1, id2))?;
    geoms[element] = Some(g);
    let mesh = PolygonalMesh::with_geometry(new_pos, new_loops, new_tags, Some(geoms))?;
    Ok(GlueResult { mesh, element, element_map, node_map })
}
