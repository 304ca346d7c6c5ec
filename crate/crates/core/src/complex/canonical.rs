//! Canonical forms by breadth-first relabeling, for isomorphism tests.

use std::collections::VecDeque;

use super::io::serialize;
use super::{Area, DefectComplex, Edge, EdgeKind, Region, Tet, Triangle};

/// Assigns ids in order of first appearance.
struct Numbering {
  ids:  Vec<Option<usize>>,
  next: usize,
}

impl Numbering {
  fn new(n: usize) -> Self { Self { ids: vec![None; n], next: 0 } }

  fn visit(&mut self, x: usize) -> usize {
    *self.ids[x].get_or_insert_with(|| {
      self.next += 1;
      self.next - 1
    })
  }

  /// Numbers the remaining cells in their old order and returns old → new.
  fn finish(mut self) -> Vec<usize> {
    for x in 0..self.ids.len() {
      self.visit(x);
    }
    self.ids.into_iter().map(|x| x.expect("numbered")).collect()
  }
}

/// The complex relabeled by a breadth-first traversal starting at tet `start`.
fn relabel_from(c: &DefectComplex, start: usize) -> DefectComplex {
  let nt = c.tets.len();
  let mut tets = Numbering::new(nt);
  let mut tris = Numbering::new(c.triangles.len());
  let mut edges = Numbering::new(c.edges.len());
  let mut verts = Numbering::new(c.vertices.len());
  let mut seen = vec![false; nt];
  let starts = std::iter::once(start).chain(0..nt);
  for s in starts {
    if seen[s] {
      continue;
    }
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(t) = queue.pop_front() {
      tets.visit(t);
      let fr = c.frame_unchecked(t);
      for &v in &fr.verts {
        verts.visit(v);
      }
      for &e in &fr.edges {
        edges.visit(e);
      }
      for &f in &c.tets[t].faces {
        tris.visit(f);
        for &(u, _) in c.triangle_tets(f) {
          if !seen[u] {
            seen[u] = true;
            queue.push_back(u);
          }
        }
      }
    }
  }
  let (tmap, fmap, emap, vmap) = (tets.finish(), tris.finish(), edges.finish(), verts.finish());
  let mut regions = Numbering::new(c.regions.len());
  let mut areas = Numbering::new(c.areas.len());
  let mut vorder: Vec<usize> = (0..c.vertices.len()).collect();
  vorder.sort_by_key(|&v| vmap[v]);
  for &v in &vorder {
    regions.visit(c.vertices[v]);
  }
  let mut eorder: Vec<usize> = (0..c.edges.len()).collect();
  eorder.sort_by_key(|&e| emap[e]);
  for &e in &eorder {
    if let EdgeKind::Defect(a) = c.edges[e].kind {
      areas.visit(a);
    }
  }
  let (rmap, amap) = (regions.finish(), areas.finish());
  permute(c, &rmap, &amap, &vmap, &emap, &fmap, &tmap)
}

/// Applies id permutations (old → new) to every cell list.
pub(crate) fn permute(
  c: &DefectComplex,
  rmap: &[usize],
  amap: &[usize],
  vmap: &[usize],
  emap: &[usize],
  fmap: &[usize],
  tmap: &[usize],
) -> DefectComplex {
  fn place<T: Clone>(items: &[T], map: &[usize]) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (i, x) in items.iter().enumerate() {
      out[map[i]] = Some(x.clone());
    }
    out.into_iter().map(|x| x.expect("permutation")).collect()
  }
  let kind = |k: EdgeKind| match k {
    EdgeKind::Bulk(r) => EdgeKind::Bulk(rmap[r]),
    EdgeKind::Defect(a) => EdgeKind::Defect(amap[a]),
  };
  let regions: Vec<Region> = place(&c.regions, rmap);
  let areas: Vec<Area> = place(
    &c.areas.iter().map(|a| Area { backend: a.backend.clone(), c_region: rmap[a.c_region], d_region: rmap[a.d_region] }).collect::<Vec<_>>(),
    amap,
  );
  let vertices: Vec<usize> = place(&c.vertices.iter().map(|&r| rmap[r]).collect::<Vec<_>>(), vmap);
  let edges: Vec<Edge> =
    place(&c.edges.iter().map(|e| Edge { tail: vmap[e.tail], head: vmap[e.head], kind: kind(e.kind) }).collect::<Vec<_>>(), emap);
  let triangles: Vec<Triangle> =
    place(&c.triangles.iter().map(|t| Triangle { edges: t.edges.map(|e| emap[e]), signs: t.signs }).collect::<Vec<_>>(), fmap);
  let tets: Vec<Tet> =
    place(&c.tets.iter().map(|t| Tet { faces: t.faces.map(|f| fmap[f]), orient: t.orient, class: t.class }).collect::<Vec<_>>(), tmap);
  DefectComplex::from_parts(regions, areas, vertices, edges, triangles, tets)
}

/// A canonical text form: the lexicographically least serialization over breadth-first
/// relabelings from every starting tetrahedron. Two connected complexes are isomorphic
/// (preserving branching, orientation and labels) iff their canonical forms agree.
pub fn canonical_form(c: &DefectComplex) -> String {
  if c.tets.is_empty() {
    return serialize(c);
  }
  (0..c.tets.len()).map(|s| serialize(&relabel_from(c, s))).min().expect("nonempty")
}

/// Whether two complexes have equal canonical forms.
pub fn isomorphic(a: &DefectComplex, b: &DefectComplex) -> bool {
  a.tets.len() == b.tets.len()
    && a.triangles.len() == b.triangles.len()
    && a.edges.len() == b.edges.len()
    && a.vertices.len() == b.vertices.len()
    && canonical_form(a) == canonical_form(b)
}
