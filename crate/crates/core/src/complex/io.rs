//! Plain-text format for defect complexes.
//!
//! ```text
//! REGIONS
//! 0 G
//! AREAS
//! # id backend c-region d-region
//! VERTICES
//! 0 0
//! EDGES
//! # id tail head bulk:<region>|defect:<area>
//! TRIANGLES
//! # id e1 s1 e2 s2 e3 s3   (signs + or -)
//! TETS
//! # id t1 t2 t3 t4 orient class   (class bulk|a|b)
//! BOUNDARY
//! triangle 3 4
//! ```
//!
//! Sections appear in this order; any may be omitted. Ids are arbitrary unique tokens,
//! renumbered densely in declaration order. The optional `BOUNDARY` section is checked
//! against the boundary computed from incidence.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{Area, DefectComplex, Edge, EdgeKind, Region, Tet, TetClass, Triangle};
use crate::error::{Error, Result};

const SECTIONS: [&str; 7] = ["REGIONS", "AREAS", "VERTICES", "EDGES", "TRIANGLES", "TETS", "BOUNDARY"];

#[derive(Default)]
struct Ids {
  map: HashMap<String, usize>,
}

impl Ids {
  fn declare(&mut self, tok: &str, line: usize, what: &str) -> Result<usize> {
    let next = self.map.len();
    if self.map.insert(tok.to_string(), next).is_some() {
      return Err(Error::SyntaxError { line, message: format!("duplicate {what} id '{tok}'") });
    }
    Ok(next)
  }

  fn get(&self, tok: &str, line: usize, what: &str) -> Result<usize> {
    self
      .map
      .get(tok)
      .copied()
      .ok_or_else(|| Error::DanglingReference { line, message: format!("unknown {what} id '{tok}'") })
  }
}

fn syntax(line: usize, message: impl Into<String>) -> Error { Error::SyntaxError { line, message: message.into() } }

fn expect_fields(toks: &[&str], n: usize, line: usize, shape: &str) -> Result<()> {
  if toks.len() != n {
    return Err(syntax(line, format!("expected '{shape}', found {} fields", toks.len())));
  }
  Ok(())
}

fn parse_sign(tok: &str, line: usize) -> Result<i8> {
  match tok {
    "+" | "+1" | "1" => Ok(1),
    "-" | "-1" => Ok(-1),
    _ => Err(syntax(line, format!("bad sign '{tok}'"))),
  }
}

/// Parses the text format.
pub fn parse(text: &str) -> Result<DefectComplex> {
  let (mut regions, mut areas, mut verts, mut edges, mut tris, mut tets) =
    (Ids::default(), Ids::default(), Ids::default(), Ids::default(), Ids::default(), Ids::default());
  let mut region_list = Vec::new();
  let mut area_list = Vec::new();
  // Area/edge region references are resolved after all regions are known, but regions
  // precede everything else, so direct lookups suffice.
  let mut vertex_list = Vec::new();
  let mut edge_list = Vec::new();
  let mut tri_list = Vec::new();
  let mut tet_list = Vec::new();
  let mut declared: Vec<(usize, &'static str, usize)> = Vec::new();
  let mut section: Option<usize> = None;
  for (idx, raw) in text.lines().enumerate() {
    let line = idx + 1;
    let body = raw.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
      continue;
    }
    if let Some(pos) = SECTIONS.iter().position(|&s| s == body) {
      if section.is_some_and(|cur| pos <= cur) {
        return Err(syntax(line, format!("section {body} out of order")));
      }
      section = Some(pos);
      continue;
    }
    let toks: Vec<&str> = body.split_whitespace().collect();
    let Some(sec) = section else {
      return Err(syntax(line, "content before the first section header"));
    };
    match SECTIONS[sec] {
      "REGIONS" => {
        expect_fields(&toks, 2, line, "id backend")?;
        regions.declare(toks[0], line, "region")?;
        region_list.push(Region { backend: toks[1].to_string() });
      }
      "AREAS" => {
        expect_fields(&toks, 4, line, "id backend c-region d-region")?;
        areas.declare(toks[0], line, "area")?;
        let c_region = regions.get(toks[2], line, "region")?;
        let d_region = regions.get(toks[3], line, "region")?;
        area_list.push(Area { backend: toks[1].to_string(), c_region, d_region });
      }
      "VERTICES" => {
        expect_fields(&toks, 2, line, "id region")?;
        verts.declare(toks[0], line, "vertex")?;
        vertex_list.push(regions.get(toks[1], line, "region")?);
      }
      "EDGES" => {
        expect_fields(&toks, 4, line, "id tail head kind")?;
        edges.declare(toks[0], line, "edge")?;
        let tail = verts.get(toks[1], line, "vertex")?;
        let head = verts.get(toks[2], line, "vertex")?;
        let kind = match toks[3].split_once(':') {
          Some(("bulk", r)) => EdgeKind::Bulk(regions.get(r, line, "region")?),
          Some(("defect", a)) => EdgeKind::Defect(areas.get(a, line, "area")?),
          _ => return Err(syntax(line, format!("bad edge kind '{}'", toks[3]))),
        };
        edge_list.push(Edge { tail, head, kind });
      }
      "TRIANGLES" => {
        expect_fields(&toks, 7, line, "id e1 s1 e2 s2 e3 s3")?;
        tris.declare(toks[0], line, "triangle")?;
        let mut es = [0; 3];
        let mut ss = [0; 3];
        for k in 0..3 {
          es[k] = edges.get(toks[1 + 2 * k], line, "edge")?;
          ss[k] = parse_sign(toks[2 + 2 * k], line)?;
        }
        tri_list.push(Triangle { edges: es, signs: ss });
      }
      "TETS" => {
        expect_fields(&toks, 7, line, "id t1 t2 t3 t4 orient class")?;
        tets.declare(toks[0], line, "tet")?;
        let mut fs = [0; 4];
        for k in 0..4 {
          fs[k] = tris.get(toks[1 + k], line, "triangle")?;
        }
        let orient = parse_sign(toks[5], line)?;
        let class = match toks[6] {
          "bulk" => TetClass::Bulk,
          "a" => TetClass::TypeA,
          "b" => TetClass::TypeB,
          other => return Err(syntax(line, format!("bad tet class '{other}'"))),
        };
        tet_list.push(Tet { faces: fs, orient, class });
      }
      "BOUNDARY" => {
        let (kind, ids) = toks.split_first().expect("non-empty line");
        let (what, table) = match *kind {
          "vertex" => ("vertex", &verts),
          "edge" => ("edge", &edges),
          "triangle" => ("triangle", &tris),
          other => return Err(syntax(line, format!("bad boundary cell kind '{other}'"))),
        };
        for tok in ids {
          declared.push((line, what, table.get(tok, line, what)?));
        }
      }
      _ => unreachable!("known section"),
    }
  }
  let c = DefectComplex::from_parts(region_list, area_list, vertex_list, edge_list, tri_list, tet_list);
  check_declared_boundary(&c, &declared)?;
  Ok(c)
}

fn check_declared_boundary(c: &DefectComplex, declared: &[(usize, &'static str, usize)]) -> Result<()> {
  if declared.is_empty() {
    return Ok(());
  }
  for &(line, what, id) in declared {
    let ok = match what {
      "vertex" => c.is_boundary_vertex(id),
      "edge" => c.is_boundary_edge(id),
      _ => c.is_boundary_triangle(id),
    };
    if !ok {
      return Err(syntax(line, format!("{what} is declared boundary but is internal")));
    }
  }
  let last = declared.last().map_or(1, |d| d.0);
  let have: BTreeSet<(&str, usize)> = declared.iter().map(|&(_, w, id)| (w, id)).collect();
  let missing = c
    .boundary_triangles()
    .into_iter()
    .map(|f| ("triangle", f))
    .chain(c.boundary_edges().into_iter().map(|e| ("edge", e)))
    .chain(c.boundary_vertices().into_iter().map(|v| ("vertex", v)))
    .find(|cell| !have.contains(cell));
  match missing {
    Some((what, id)) => Err(syntax(last, format!("boundary {what} {id} missing from BOUNDARY section"))),
    None => Ok(()),
  }
}

/// Serializes to the text format with dense ids, canonical triangles, frame-ordered tet
/// faces and a computed `BOUNDARY` section.
pub fn serialize(c: &DefectComplex) -> String {
  let mut out = String::new();
  out.push_str("REGIONS\n");
  for (i, r) in c.regions().iter().enumerate() {
    let _ = writeln!(out, "{i} {}", r.backend);
  }
  out.push_str("AREAS\n");
  for (i, a) in c.areas().iter().enumerate() {
    let _ = writeln!(out, "{i} {} {} {}", a.backend, a.c_region, a.d_region);
  }
  out.push_str("VERTICES\n");
  for (i, r) in c.vertex_regions().iter().enumerate() {
    let _ = writeln!(out, "{i} {r}");
  }
  out.push_str("EDGES\n");
  for (i, e) in c.edges().iter().enumerate() {
    let kind = match e.kind {
      EdgeKind::Bulk(r) => format!("bulk:{r}"),
      EdgeKind::Defect(a) => format!("defect:{a}"),
    };
    let _ = writeln!(out, "{i} {} {} {kind}", e.tail, e.head);
  }
  out.push_str("TRIANGLES\n");
  let sign = |s: i8| if s > 0 { "+" } else { "-" };
  for (i, t) in c.triangles().iter().enumerate() {
    let _ = writeln!(
      out,
      "{i} {} {} {} {} {} {}",
      t.edges[0],
      sign(t.signs[0]),
      t.edges[1],
      sign(t.signs[1]),
      t.edges[2],
      sign(t.signs[2])
    );
  }
  out.push_str("TETS\n");
  for (i, t) in c.tets().iter().enumerate() {
    let f = t.faces;
    let _ = writeln!(out, "{i} {} {} {} {} {} {}", f[0], f[1], f[2], f[3], sign(t.orient), t.class.token());
  }
  out.push_str("BOUNDARY\n");
  let list = |ids: Vec<usize>| ids.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
  for (kind, ids) in [("vertex", c.boundary_vertices()), ("edge", c.boundary_edges()), ("triangle", c.boundary_triangles())] {
    if !ids.is_empty() {
      let _ = writeln!(out, "{kind} {}", list(ids));
    }
  }
  out
}

/// `serialize(parse(text))`.
pub fn normalize(text: &str) -> Result<String> { Ok(serialize(&parse(text)?)) }

#[cfg(test)]
mod tests {
  use super::*;

  const ONE_TET: &str = "\
REGIONS
r G
VERTICES
a r
b r
c r
d r
EDGES
ab a b bulk:r
ac a c bulk:r
ad a d bulk:r
bc b c bulk:r
bd b d bulk:r
cd c d bulk:r
TRIANGLES
abc ab + bc + ac -
bcd bc + cd + bd -
acd ac + cd + ad -
abd ab + bd + ad -
TETS
t abc bcd acd abd + bulk
";

  #[test]
  fn parses_and_reframes_a_tet() {
    let c = parse(ONE_TET).unwrap();
    assert_eq!(c.tets().len(), 1);
    let fr = c.frame(0).unwrap();
    assert_eq!(fr.verts, [0, 1, 2, 3]);
    assert_eq!(c.boundary_triangles().len(), 4);
    let again = parse(&serialize(&c)).unwrap();
    assert_eq!(serialize(&again), serialize(&c));
  }

  #[test]
  fn dangling_edge_reference() {
    let bad = ONE_TET.replace("abc ab + bc + ac -", "abc ab + bc + zz -");
    match parse(&bad) {
      Err(Error::DanglingReference { line, .. }) => assert_eq!(line, 16),
      other => panic!("unexpected {other:?}"),
    }
  }

  #[test]
  fn out_of_order_sections_are_rejected() {
    let bad = "VERTICES\nREGIONS\n".to_string();
    assert!(matches!(parse(&bad), Err(Error::SyntaxError { line: 2, .. })));
  }

  #[test]
  fn boundary_section_is_checked() {
    let good = format!("{ONE_TET}BOUNDARY\nvertex a b c d\nedge ab ac ad bc bd cd\ntriangle abc bcd acd abd\n");
    assert!(parse(&good).is_ok());
    let short = format!("{ONE_TET}BOUNDARY\ntriangle abc bcd acd\n");
    assert!(matches!(parse(&short), Err(Error::SyntaxError { .. })));
  }
}
