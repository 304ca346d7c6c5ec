//! Disjoint unions and gluing along boundary triangles.
//!
//! Two boundary triangles are identified by the unique map preserving their branching
//! order (corner `i` to corner `i`), so edge `k` of one canonical triangle is identified
//! with edge `k` of the other. A matching must reverse orientation: the two induced
//! signs must be opposite.

use super::validate::{validate, UnionFind};
use super::{Area, DefectComplex, Edge, EdgeKind, Region, Tet, Triangle};
use crate::error::{Error, Result};

/// Pairs of boundary triangles to identify.
pub type Matching = Vec<(usize, usize)>;

fn incompatible(msg: impl Into<String>) -> Error { Error::IncompatibleMatching(msg.into()) }

/// The disjoint union; ids of `b` are shifted past those of `a`, and region and area
/// tables are concatenated.
pub fn disjoint_union(a: &DefectComplex, b: &DefectComplex) -> DefectComplex {
  let (nr, na, nv, ne, nf) = (a.regions.len(), a.areas.len(), a.vertices.len(), a.edges.len(), a.triangles.len());
  let mut regions = a.regions.clone();
  regions.extend(b.regions.iter().cloned());
  let mut areas = a.areas.clone();
  areas.extend(b.areas.iter().map(|x| Area { backend: x.backend.clone(), c_region: x.c_region + nr, d_region: x.d_region + nr }));
  let mut vertices = a.vertices.clone();
  vertices.extend(b.vertices.iter().map(|&r| r + nr));
  let mut edges = a.edges.clone();
  edges.extend(b.edges.iter().map(|e| Edge {
    tail: e.tail + nv,
    head: e.head + nv,
    kind: match e.kind {
      EdgeKind::Bulk(r) => EdgeKind::Bulk(r + nr),
      EdgeKind::Defect(x) => EdgeKind::Defect(x + na),
    },
  }));
  let mut triangles = a.triangles.clone();
  triangles.extend(b.triangles.iter().map(|t| Triangle { edges: t.edges.map(|e| e + ne), signs: t.signs }));
  let mut tets = a.tets.clone();
  tets.extend(b.tets.iter().map(|t| Tet { faces: t.faces.map(|f| f + nf), orient: t.orient, class: t.class }));
  DefectComplex::from_parts(regions, areas, vertices, edges, triangles, tets)
}

/// Glues `b` to `a`, identifying triangle `x` of `a` with triangle `y` of `b` for every
/// `(x, y)` in the matching.
pub fn glue(a: &DefectComplex, b: &DefectComplex, matching: &[(usize, usize)]) -> Result<DefectComplex> {
  let nf = a.triangles.len();
  for &(x, y) in matching {
    if x >= nf || y >= b.triangles.len() {
      return Err(incompatible(format!("pair ({x}, {y}) references a missing triangle")));
    }
  }
  let u = disjoint_union(a, b);
  let shifted: Vec<(usize, usize)> = matching.iter().map(|&(x, y)| (x, y + nf)).collect();
  glue_self(&u, &shifted)
}

/// Identifies pairs of boundary triangles of one complex. Regions (areas) whose vertices
/// (edges) get identified are merged; they must carry the same backend name.
pub fn glue_self(c: &DefectComplex, matching: &[(usize, usize)]) -> Result<DefectComplex> {
  Ok(glue_self_tracked(c, matching)?.0)
}

/// [`glue_self`] together with the old → new vertex and edge maps.
pub(crate) fn glue_self_tracked(
  c: &DefectComplex,
  matching: &[(usize, usize)],
) -> Result<(DefectComplex, Vec<usize>, Vec<usize>)> {
  let nf = c.triangles.len();
  let mut used = vec![false; nf];
  for &(x, y) in matching {
    for f in [x, y] {
      if f >= nf || !c.is_boundary_triangle(f) {
        return Err(incompatible(format!("triangle {f} is not a boundary triangle")));
      }
      if used[f] {
        return Err(incompatible(format!("triangle {f} is matched twice")));
      }
      used[f] = true;
    }
    let (tx, ty) = (c.triangle_tets(x)[0], c.triangle_tets(y)[0]);
    if c.induced_sign(tx.0, tx.1) == c.induced_sign(ty.0, ty.1) {
      return Err(incompatible(format!("triangles {x} and {y} are glued with matching orientations")));
    }
  }
  let (nv, ne) = (c.vertices.len(), c.edges.len());
  let mut vuf = UnionFind::new(nv);
  let mut euf = UnionFind::new(ne);
  let mut ruf = UnionFind::new(c.regions.len());
  let mut auf = UnionFind::new(c.areas.len());
  for &(x, y) in matching {
    let (a, b) = (c.triangles[x], c.triangles[y]);
    for k in 0..3 {
      let (ea, eb) = (c.edges[a.edges[k]], c.edges[b.edges[k]]);
      match (ea.kind, eb.kind) {
        (EdgeKind::Bulk(r), EdgeKind::Bulk(s)) => ruf.union(r, s),
        (EdgeKind::Defect(p), EdgeKind::Defect(q)) => auf.union(p, q),
        _ => return Err(incompatible(format!("triangles {x} and {y} identify a bulk edge with a defect edge"))),
      }
      euf.union(a.edges[k], b.edges[k]);
      vuf.union(ea.tail, eb.tail);
      vuf.union(ea.head, eb.head);
    }
  }
  for v in 0..nv {
    let r = vuf.find(v);
    ruf.union(c.vertices[v], c.vertices[r]);
  }
  for (i, a) in c.areas.iter().enumerate() {
    let r = auf.find(i);
    let root = &c.areas[r];
    ruf.union(a.c_region, root.c_region);
    ruf.union(a.d_region, root.d_region);
  }
  // Merged labels must agree.
  for r in 0..c.regions.len() {
    let root = ruf.find(r);
    if c.regions[r].backend != c.regions[root].backend {
      return Err(incompatible(format!("regions {r} and {root} carry different backends")));
    }
  }
  for a in 0..c.areas.len() {
    let root = auf.find(a);
    if c.areas[a].backend != c.areas[root].backend {
      return Err(incompatible(format!("areas {a} and {root} carry different backends")));
    }
  }
  let dense = |uf: &mut UnionFind, n: usize| {
    let mut ids = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
      let r = uf.find(x);
      if ids[r] == usize::MAX {
        ids[r] = reps.len();
        reps.push(r);
      }
      ids[x] = ids[r];
    }
    (ids, reps)
  };
  let (rid, rreps) = dense(&mut ruf, c.regions.len());
  let (aid, areps) = dense(&mut auf, c.areas.len());
  let (vid, vreps) = dense(&mut vuf, nv);
  let (eid, ereps) = dense(&mut euf, ne);
  let regions: Vec<Region> = rreps.iter().map(|&r| c.regions[r].clone()).collect();
  let areas: Vec<Area> = areps
    .iter()
    .map(|&a| Area { backend: c.areas[a].backend.clone(), c_region: rid[c.areas[a].c_region], d_region: rid[c.areas[a].d_region] })
    .collect();
  let vertices: Vec<usize> = vreps.iter().map(|&v| rid[c.vertices[v]]).collect();
  let edges: Vec<Edge> = ereps
    .iter()
    .map(|&e| {
      let x = c.edges[e];
      let kind = match x.kind {
        EdgeKind::Bulk(r) => EdgeKind::Bulk(rid[r]),
        EdgeKind::Defect(a) => EdgeKind::Defect(aid[a]),
      };
      Edge { tail: vid[x.tail], head: vid[x.head], kind }
    })
    .collect();
  // Triangles: drop the second member of each pair and point its users at the first.
  let mut tri_target: Vec<usize> = (0..nf).collect();
  for &(x, y) in matching {
    tri_target[y] = x;
  }
  let keep: Vec<bool> = (0..nf).map(|f| tri_target[f] == f).collect();
  let mut fid = vec![usize::MAX; nf];
  let mut triangles = Vec::new();
  for f in 0..nf {
    if keep[f] {
      fid[f] = triangles.len();
      let t = c.triangles[f];
      triangles.push(Triangle { edges: t.edges.map(|e| eid[e]), signs: t.signs });
    }
  }
  let tets: Vec<Tet> =
    c.tets.iter().map(|t| Tet { faces: t.faces.map(|f| fid[tri_target[f]]), orient: t.orient, class: t.class }).collect();
  let mut out = DefectComplex::from_parts(regions, areas, vertices, edges, triangles, tets);
  out.recompute_classes();
  let report = validate(&out);
  if !report.is_ok() {
    return Err(incompatible(report.to_string().trim().to_string()));
  }
  Ok((out, vid, eid))
}
