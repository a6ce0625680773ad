//! Plain-text mesh format.
//!
//! ```text
//! POLYMESH 1
//! NODES n
//! id x y
//! ELEMENTS m
//! id count v0 v1 ...
//! BOUNDARY b
//! za zb D|N
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{edge_key, BoundaryClass, BoundaryTag, PolygonalMesh};
use crate::error::{Error, MeshError};
use crate::geometry::Point2;

pub fn write_mesh(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    s.push_str("POLYMESH 1\n");
    let _ = writeln!(s, "NODES {}", mesh.num_nodes());
    for n in mesh.nodes() {
        let _ = writeln!(s, "{} {:.16e} {:.16e}", n.id, n.position.x, n.position.y);
    }
    let _ = writeln!(s, "ELEMENTS {}", mesh.num_elements());
    for el in mesh.elements() {
        let _ = write!(s, "{} {}", el.id, el.boundary_loop.len());
        for v in &el.boundary_loop {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let boundary: Vec<_> = mesh.edges().iter().filter(|e| e.is_boundary()).collect();
    let _ = writeln!(s, "BOUNDARY {}", boundary.len());
    for e in boundary {
        let tag = if e.boundary_class == BoundaryClass::Neumann { "N" } else { "D" };
        let _ = writeln!(s, "{} {} {tag}", e.endpoints.0, e.endpoints.1);
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.split('#').next().unwrap_or("").trim();
            if !l.is_empty() {
                return Some((i + 1, l.split_whitespace().collect()));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), MeshError> {
        self.next_content().ok_or(MeshError::Parse { line: 0, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, MeshError> {
    tok.parse().map_err(|_| MeshError::Parse { line, msg: format!("invalid number '{tok}'") })
}

fn section(lines: &mut Lines, name: &str) -> Result<usize, MeshError> {
    let (line, t) = lines.expect(name)?;
    if t.len() != 2 || t[0] != name {
        return Err(MeshError::Parse { line, msg: format!("expected '{name} <count>'") });
    }
    parse(t[1], line)
}

pub fn read_mesh(text: &str) -> Result<PolygonalMesh, MeshError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (line, h) = lines.expect("header")?;
    if h != ["POLYMESH", "1"] {
        return Err(MeshError::Parse { line, msg: "expected header 'POLYMESH 1'".into() });
    }
    let n = section(&mut lines, "NODES")?;
    let mut positions = vec![None; n];
    for _ in 0..n {
        let (line, t) = lines.expect("node")?;
        if t.len() != 3 {
            return Err(MeshError::Parse { line, msg: "expected 'id x y'".into() });
        }
        let id: usize = parse(t[0], line)?;
        if id >= n || positions[id].is_some() {
            return Err(MeshError::Parse { line, msg: format!("node id {id} out of range or repeated") });
        }
        let p = Point2::new(parse(t[1], line)?, parse(t[2], line)?);
        if !p.is_finite() {
            return Err(MeshError::Parse { line, msg: "non-finite coordinate".into() });
        }
        positions[id] = Some(p);
    }
    let positions: Vec<Point2> = positions.into_iter().map(|p| p.expect("all ids seen")).collect();
    let m = section(&mut lines, "ELEMENTS")?;
    let mut loops = vec![None; m];
    for _ in 0..m {
        let (line, t) = lines.expect("element")?;
        if t.len() < 2 {
            return Err(MeshError::Parse { line, msg: "expected 'id count v0 ...'".into() });
        }
        let id: usize = parse(t[0], line)?;
        let count: usize = parse(t[1], line)?;
        if id >= m || loops[id].is_some() {
            return Err(MeshError::Parse { line, msg: format!("element id {id} out of range or repeated") });
        }
        if t.len() != count + 2 || count < 3 {
            return Err(MeshError::Parse { line, msg: format!("element {id} lists {} of {count} vertices", t.len() - 2) });
        }
        let lp = t[2..].iter().map(|s| parse::<usize>(s, line)).collect::<Result<Vec<_>, _>>()?;
        if let Some(&v) = lp.iter().find(|&&v| v >= n) {
            return Err(MeshError::Parse { line, msg: format!("unknown node {v}") });
        }
        loops[id] = Some(lp);
    }
    let loops: Vec<Vec<usize>> = loops.into_iter().map(|l| l.expect("all ids seen")).collect();
    let mut tags = HashMap::new();
    if let Some((line, t)) = lines.next_content() {
        if t.len() != 2 || t[0] != "BOUNDARY" {
            return Err(MeshError::Parse { line, msg: "expected 'BOUNDARY <count>'".into() });
        }
        let b: usize = parse(t[1], line)?;
        for _ in 0..b {
            let (line, t) = lines.expect("boundary edge")?;
            if t.len() != 3 {
                return Err(MeshError::Parse { line, msg: "expected 'za zb TAG'".into() });
            }
            let tag = match t[2] {
                "D" => BoundaryTag::Dirichlet,
                "N" => BoundaryTag::Neumann,
                other => return Err(MeshError::Parse { line, msg: format!("unknown boundary tag '{other}'") }),
            };
            tags.insert(edge_key(parse(t[0], line)?, parse(t[1], line)?), tag);
        }
    }
    if let Some((line, _)) = lines.next_content() {
        return Err(MeshError::Parse { line, msg: "trailing content".into() });
    }
    PolygonalMesh::new(positions, loops, tags)
}

pub fn load_mesh(path: &Path) -> Result<PolygonalMesh, Error> {
    Ok(read_mesh(&std::fs::read_to_string(path)?)?)
}

pub fn save_mesh(mesh: &PolygonalMesh, path: &Path) -> Result<(), Error> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, Rect, StructuredKind};

    #[test]
    fn round_trip() {
        let m = generate_structured(StructuredKind::LTiles, 3, Rect::new(-1.0, -1.0, 1.0, 1.0), |a, _| {
            if a.x == 1.0 {
                BoundaryTag::Neumann
            } else {
                BoundaryTag::Dirichlet
            }
        });
        let text = write_mesh(&m);
        let r = read_mesh(&text).unwrap();
        assert_eq!(r.positions(), m.positions());
        assert_eq!(r.loops(), m.loops());
        assert_eq!(write_mesh(&r), text);
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = read_mesh("POLYMESH 1\nNODES 1\n0 0 x\n").unwrap_err();
        assert_eq!(e, MeshError::Parse { line: 3, msg: "invalid number 'x'".into() });
    }
}
