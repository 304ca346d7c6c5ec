//! Combinatorial triangulated 3-manifolds with defect surfaces.
//!
//! A [`DefectComplex`] is a branched Δ-complex: every edge is directed, every triangle is
//! a boundary cycle of three edges that does not form a directed cycle, and every
//! tetrahedron lists its four faces opposite its local vertices `0..3` in branching
//! order. Loops and multiple edges are allowed, so one-vertex triangulations are
//! representable. Vertices carry a region; edges are either bulk edges of a region or
//! defect edges of an area, directed from the area's `D`-side region to its `C`-side
//! region. Defect surfaces are implicit: their vertices, edges and faces are the defect
//! edges, defect triangles and defect tetrahedra.

mod canonical;
mod glue;
mod io;
mod moves;
mod refine;
mod validate;

use std::collections::{HashMap, VecDeque};

pub use canonical::{canonical_form, isomorphic};
pub use glue::{disjoint_union, glue, glue_self, Matching};
pub(crate) use glue::glue_self_tracked;
pub(crate) use validate::UnionFind;
pub use io::{normalize, parse, serialize};
pub use moves::{
  apply_move, apply_move_tracked, candidate_moves, random_walk, MoveDescriptor, MoveKind, MoveOutcome, Placement, WalkLimits,
  WalkStep,
};
pub use refine::{is_fine_neighbourhood, refine_to_fine_neighbourhoods, refine_to_fine_neighbourhoods_tracked};
pub use validate::{validate, validate_with, ValidateOptions, ValidationReport, Violation, ViolationKind};

use crate::error::{Error, Result};

/// A bulk region, labeled by the name of a fusion backend.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
  /// Name of the fusion backend (e.g. `G`).
  pub backend: String,
}

/// A defect area: a bimodule backend between the `C`-side and `D`-side regions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Area {
  /// Name of the bimodule backend.
  pub backend:  String,
  /// Region on the head side of defect edges (acting on the left).
  pub c_region: usize,
  /// Region on the tail side of defect edges (acting on the right).
  pub d_region: usize,
}

/// Whether an edge lies in a region or crosses a defect area.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
  /// A bulk edge inside the given region.
  Bulk(usize),
  /// A defect edge crossing the given area.
  Defect(usize),
}

/// A directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
  /// Tail vertex.
  pub tail: usize,
  /// Head vertex.
  pub head: usize,
  /// Bulk or defect classification.
  pub kind: EdgeKind,
}

/// A triangle as a closed boundary cycle: three edges with traversal signs.
///
/// Acyclic triangles are stored canonically as `[e01, e12, e02]` with signs `[+, +, -]`,
/// where `0 < 1 < 2` is the branching order of its corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
  /// Edge ids in traversal order.
  pub edges: [usize; 3],
  /// Traversal signs (`+1` along the edge direction).
  pub signs: [i8; 3],
}

impl Triangle {
  /// A triangle in canonical form from its three edges in branching order.
  pub fn from_branching(e01: usize, e12: usize, e02: usize) -> Self { Self { edges: [e01, e12, e02], signs: [1, 1, -1] } }

  /// Whether all traversal signs agree, i.e. the edges form a directed cycle.
  pub fn is_cyclic(&self) -> bool { self.signs[0] == self.signs[1] && self.signs[1] == self.signs[2] }

  /// The canonical rotation/reflection, or `None` for a directed cycle.
  pub fn canonical(&self) -> Option<Self> {
    if self.is_cyclic() {
      return None;
    }
    let minus = self.signs.iter().filter(|&&s| s < 0).count();
    let (edges, signs) = if minus == 1 {
      (self.edges, self.signs)
    } else {
      let e = self.edges;
      let s = self.signs;
      ([e[2], e[1], e[0]], [-s[2], -s[1], -s[0]])
    };
    let k = (0..3).find(|&k| signs[(k + 2) % 3] < 0).expect("one negative sign");
    Some(Self { edges: [edges[k], edges[(k + 1) % 3], edges[(k + 2) % 3]], signs: [1, 1, -1] })
  }

  /// Whether the stored form is canonical.
  pub fn is_canonical(&self) -> bool { self.signs == [1, 1, -1] }
}

/// Defect classification of a tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TetClass {
  /// No defect edges.
  Bulk,
  /// Three defect edges meeting at one vertex (the surface cuts off a corner).
  TypeA,
  /// Four defect edges; the two bulk edges are opposite (the surface is a quadrilateral).
  TypeB,
}

impl TetClass {
  /// File-format token.
  pub fn token(self) -> &'static str {
    match self {
      TetClass::Bulk => "bulk",
      TetClass::TypeA => "a",
      TetClass::TypeB => "b",
    }
  }
}

/// A tetrahedron: faces opposite local vertices `0..3` in branching order, an orientation
/// sign relative to that order, and a defect class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tet {
  /// Triangle ids; `faces[i]` is opposite local vertex `i`.
  pub faces:  [usize; 4],
  /// `+1` if the branching order is positively oriented.
  pub orient: i8,
  /// Defect classification.
  pub class:  TetClass,
}

/// Local structure of a tetrahedron: vertices and edges in branching order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TetFrame {
  /// Global vertex ids of local vertices `0..3`.
  pub verts: [usize; 4],
  /// Edge ids in the order `01, 02, 03, 12, 13, 23`.
  pub edges: [usize; 6],
}

/// Local vertex pairs of [`TetFrame::edges`].
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// For each face (opposite local vertex `i`), its local corners in increasing order.
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Index into [`TetFrame::edges`] of the pair `(i, j)` with `i < j`.
pub fn tet_edge_index(i: usize, j: usize) -> usize {
  let (a, b) = if i < j { (i, j) } else { (j, i) };
  TET_EDGES.iter().position(|&p| p == (a, b)).expect("valid local pair")
}

impl TetFrame {
  /// Edge ids `[e01, e12, e02]` of the face opposite local vertex `i`.
  pub fn face_edges(&self, i: usize) -> [usize; 3] {
    let [a, b, c] = TET_FACES[i];
    [self.edges[tet_edge_index(a, b)], self.edges[tet_edge_index(b, c)], self.edges[tet_edge_index(a, c)]]
  }
}

/// Which side of a defect surface a vertex lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Colour {
  /// Pure bulk, not adjacent to a defect edge.
  N,
  /// Head side of defect edges.
  C,
  /// Tail side of defect edges.
  D,
}

/// A branched Δ-complex with region and defect-area labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectComplex {
  regions:   Vec<Region>,
  areas:     Vec<Area>,
  vertices:  Vec<usize>,
  edges:     Vec<Edge>,
  triangles: Vec<Triangle>,
  tets:      Vec<Tet>,
  // Derived incidence data.
  frames:    Vec<Option<TetFrame>>,
  tri_tets:  Vec<Vec<(usize, usize)>>,
  bdry_vert: Vec<bool>,
  bdry_edge: Vec<bool>,
  bdry_tri:  Vec<bool>,
}

impl DefectComplex {
  /// Assembles a complex from raw cell lists, canonicalising triangles, re-ordering tet
  /// faces into a consistent frame where possible, and computing boundary incidence.
  /// No validation is done; see [`validate`].
  pub fn from_parts(
    regions: Vec<Region>,
    areas: Vec<Area>,
    vertices: Vec<usize>,
    edges: Vec<Edge>,
    triangles: Vec<Triangle>,
    tets: Vec<Tet>,
  ) -> Self {
    let triangles: Vec<Triangle> = triangles.into_iter().map(|t| t.canonical().unwrap_or(t)).collect();
    let mut c = Self {
      regions,
      areas,
      vertices,
      edges,
      triangles,
      tets,
      frames: Vec::new(),
      tri_tets: Vec::new(),
      bdry_vert: Vec::new(),
      bdry_edge: Vec::new(),
      bdry_tri: Vec::new(),
    };
    for t in 0..c.tets.len() {
      if let Some(faces) = c.find_consistent_face_order(c.tets[t].faces) {
        c.tets[t].faces = faces;
      }
    }
    c.recompute();
    c
  }

  fn find_consistent_face_order(&self, faces: [usize; 4]) -> Option<[usize; 4]> {
    const PERMS: [[usize; 4]; 24] = [
      [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
      [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
      [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
      [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
    ];
    PERMS.iter().map(|p| [faces[p[0]], faces[p[1]], faces[p[2]], faces[p[3]]]).find(|f| self.frame_of(f).is_some())
  }

  /// The frame determined by faces in the given order, if they fit together.
  fn frame_of(&self, faces: &[usize; 4]) -> Option<TetFrame> {
    let tri = |i: usize| self.triangles.get(faces[i]).filter(|t| t.is_canonical()).map(|t| t.edges);
    let (f0, f1, f2, f3) = (tri(0)?, tri(1)?, tri(2)?, tri(3)?);
    let [e01, e12, e02] = f3;
    let [e12b, e23, e13] = f0;
    let [e02b, e23b, e03] = f1;
    let [e01b, e13b, e03b] = f2;
    if e12 != e12b || e02 != e02b || e23 != e23b || e01 != e01b || e13 != e13b || e03 != e03b {
      return None;
    }
    let edge = |e: usize| self.edges.get(e);
    let (x01, x12, x23) = (edge(e01)?, edge(e12)?, edge(e23)?);
    Some(TetFrame { verts: [x01.tail, x01.head, x12.head, x23.head], edges: [e01, e02, e03, e12, e13, e23] })
  }

  /// Recomputes frames, triangle–tet incidence and boundary flags.
  pub(crate) fn recompute(&mut self) {
    self.frames = self.tets.iter().map(|t| self.frame_of(&t.faces)).collect();
    self.tri_tets = vec![Vec::new(); self.triangles.len()];
    for (t, tet) in self.tets.iter().enumerate() {
      for (slot, &f) in tet.faces.iter().enumerate() {
        if let Some(v) = self.tri_tets.get_mut(f) {
          v.push((t, slot));
        }
      }
    }
    self.bdry_tri = self.tri_tets.iter().map(|v| v.len() == 1).collect();
    self.bdry_edge = vec![false; self.edges.len()];
    self.bdry_vert = vec![false; self.vertices.len()];
    for (f, tri) in self.triangles.iter().enumerate() {
      if self.bdry_tri[f] {
        for &e in &tri.edges {
          if let Some(edge) = self.edges.get(e) {
            self.bdry_edge[e] = true;
            for v in [edge.tail, edge.head] {
              if v < self.bdry_vert.len() {
                self.bdry_vert[v] = true;
              }
            }
          }
        }
      }
    }
  }

  /// Region table.
  pub fn regions(&self) -> &[Region] { &self.regions }

  /// Area table.
  pub fn areas(&self) -> &[Area] { &self.areas }

  /// Region of every vertex.
  pub fn vertex_regions(&self) -> &[usize] { &self.vertices }

  /// Edge list.
  pub fn edges(&self) -> &[Edge] { &self.edges }

  /// Triangle list.
  pub fn triangles(&self) -> &[Triangle] { &self.triangles }

  /// Tetrahedron list.
  pub fn tets(&self) -> &[Tet] { &self.tets }

  /// Number of vertices.
  pub fn num_vertices(&self) -> usize { self.vertices.len() }

  /// The frame of tetrahedron `t`, if its faces fit together.
  pub fn frame(&self, t: usize) -> Option<TetFrame> { self.frames.get(t).copied().flatten() }

  /// The frame of tetrahedron `t`; panics if the complex is not well-formed.
  pub(crate) fn frame_unchecked(&self, t: usize) -> TetFrame { self.frames[t].expect("framed tetrahedron") }

  /// `(tet, slot)` pairs of the tetrahedra containing triangle `f`.
  pub fn triangle_tets(&self, f: usize) -> &[(usize, usize)] { &self.tri_tets[f] }

  /// Whether vertex `v` lies on the boundary.
  pub fn is_boundary_vertex(&self, v: usize) -> bool { self.bdry_vert[v] }

  /// Whether edge `e` lies on the boundary.
  pub fn is_boundary_edge(&self, e: usize) -> bool { self.bdry_edge[e] }

  /// Whether triangle `f` lies on the boundary.
  pub fn is_boundary_triangle(&self, f: usize) -> bool { self.bdry_tri[f] }

  /// Whether the complex has no boundary.
  pub fn is_closed(&self) -> bool { !self.bdry_tri.iter().any(|&b| b) }

  /// Boundary triangle ids.
  pub fn boundary_triangles(&self) -> Vec<usize> { (0..self.triangles.len()).filter(|&f| self.bdry_tri[f]).collect() }

  /// Boundary edge ids.
  pub fn boundary_edges(&self) -> Vec<usize> { (0..self.edges.len()).filter(|&e| self.bdry_edge[e]).collect() }

  /// Boundary vertex ids.
  pub fn boundary_vertices(&self) -> Vec<usize> { (0..self.vertices.len()).filter(|&v| self.bdry_vert[v]).collect() }

  /// Whether edge `e` is a defect edge.
  pub fn is_defect_edge(&self, e: usize) -> bool { matches!(self.edges[e].kind, EdgeKind::Defect(_)) }

  /// Whether the complex has any defect edge.
  pub fn has_defects(&self) -> bool { self.edges.iter().any(|e| matches!(e.kind, EdgeKind::Defect(_))) }

  /// Euler characteristic `V − E + F − T`.
  pub fn euler_characteristic(&self) -> i64 {
    self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64 - self.tets.len() as i64
  }

  /// Induced orientation sign of tet `t` on its face in `slot`, relative to the face's
  /// branching order.
  pub fn induced_sign(&self, t: usize, slot: usize) -> i8 {
    let s = self.tets[t].orient;
    if slot.is_multiple_of(2) { s } else { -s }
  }

  /// Whether triangle `f` has two defect edges.
  pub fn is_defect_triangle(&self, f: usize) -> bool {
    self.triangles[f].edges.iter().filter(|&&e| self.is_defect_edge(e)).count() > 0
  }

  /// The defect class implied by the edge kinds of tet `t`, or a description of the
  /// transversality violation.
  pub fn classify_tet(&self, t: usize) -> std::result::Result<TetClass, String> {
    let fr = self.frame(t).ok_or_else(|| format!("tet {t} has inconsistent faces"))?;
    classify_frame(&fr, |e| self.edges[e].kind)
  }

  /// Recomputes every tetrahedron's class from its edges (invalid patterns keep their
  /// stored class so validation can report them).
  pub fn recompute_classes(&mut self) {
    for t in 0..self.tets.len() {
      if let Ok(class) = self.classify_tet(t) {
        self.tets[t].class = class;
      }
    }
  }

  /// The regions on which vertex colours are determined: `C` for heads of defect edges,
  /// `D` for tails, propagated along bulk edges; `N` elsewhere.
  pub fn vertex_colours(&self) -> Vec<Colour> {
    let mut colour = vec![Colour::N; self.vertices.len()];
    let mut queue = VecDeque::new();
    for e in &self.edges {
      if let EdgeKind::Defect(_) = e.kind {
        for (v, c) in [(e.tail, Colour::D), (e.head, Colour::C)] {
          if colour[v] == Colour::N {
            colour[v] = c;
            queue.push_back(v);
          }
        }
      }
    }
    let mut adj = vec![Vec::new(); self.vertices.len()];
    for e in &self.edges {
      if let EdgeKind::Bulk(_) = e.kind {
        adj[e.tail].push(e.head);
        adj[e.head].push(e.tail);
      }
    }
    while let Some(v) = queue.pop_front() {
      for &w in &adj[v] {
        if colour[w] == Colour::N {
          colour[w] = colour[v];
          queue.push_back(w);
        }
      }
    }
    colour
  }

  /// Flips the orientation of every tetrahedron.
  pub fn mirror(&self) -> Self {
    let mut c = self.clone();
    for t in &mut c.tets {
      t.orient = -t.orient;
    }
    c
  }

  /// Re-chooses tetrahedron orientations so that every internal triangle receives
  /// opposite induced signs, keeping the orientation of the first tet of each component.
  pub fn orient_consistently(&mut self) -> Result<()> {
    let n = self.tets.len();
    let mut set = vec![false; n];
    for start in 0..n {
      if set[start] {
        continue;
      }
      set[start] = true;
      let mut queue = VecDeque::from([start]);
      while let Some(t) = queue.pop_front() {
        for slot in 0..4 {
          let f = self.tets[t].faces[slot];
          let want = -self.induced_sign(t, slot);
          for &(u, us) in &self.tri_tets[f].clone() {
            if (u, us) == (t, slot) {
              continue;
            }
            let parity: i8 = if us % 2 == 0 { 1 } else { -1 };
            let orient = want * parity;
            if set[u] {
              if self.tets[u].orient != orient {
                return Err(Error::NotOrientable(format!("tets {t} and {u} disagree across triangle {f}")));
              }
            } else {
              self.tets[u].orient = orient;
              set[u] = true;
              queue.push_back(u);
            }
          }
        }
      }
    }
    Ok(())
  }

  /// Reverses the listed edges, re-canonicalises their triangles and re-frames the
  /// affected tetrahedra (orientations pick up the permutation parity). Labels are not
  /// part of the complex; callers transport them by inverting.
  pub fn reverse_edges(&self, flip: &[usize]) -> Result<Self> {
    let mut flipped = vec![false; self.edges.len()];
    for &e in flip {
      if e >= self.edges.len() {
        return Err(Error::LabelOutOfRange(format!("edge {e}")));
      }
      flipped[e] = true;
    }
    let mut edges = self.edges.clone();
    for (e, edge) in edges.iter_mut().enumerate() {
      if flipped[e] {
        std::mem::swap(&mut edge.tail, &mut edge.head);
      }
    }
    let mut triangles = Vec::with_capacity(self.triangles.len());
    for (f, t) in self.triangles.iter().enumerate() {
      let mut t = *t;
      for i in 0..3 {
        if flipped[t.edges[i]] {
          t.signs[i] = -t.signs[i];
        }
      }
      triangles.push(t.canonical().ok_or_else(|| Error::InvalidComplex(format!("reversal makes triangle {f} cyclic")))?);
    }
    let mut tets = Vec::with_capacity(self.tets.len());
    for (t, tet) in self.tets.iter().enumerate() {
      let fr = self.frame(t).ok_or_else(|| Error::InvalidComplex(format!("tet {t} has inconsistent faces")))?;
      // Local tournament after reversal: i → j for the local pair of each edge.
      let mut before = [[false; 4]; 4];
      for (k, &(i, j)) in TET_EDGES.iter().enumerate() {
        if flipped[fr.edges[k]] {
          before[j][i] = true;
        } else {
          before[i][j] = true;
        }
      }
      let mut order: Vec<usize> = (0..4).collect();
      order.sort_by_key(|&i| std::cmp::Reverse((0..4).filter(|&j| before[i][j]).count()));
      for a in 0..4 {
        for b in a + 1..4 {
          if !before[order[a]][order[b]] {
            return Err(Error::InvalidComplex(format!("reversal makes tet {t} cyclic")));
          }
        }
      }
      let faces = [tet.faces[order[0]], tet.faces[order[1]], tet.faces[order[2]], tet.faces[order[3]]];
      tets.push(Tet { faces, orient: tet.orient * permutation_sign(&order), class: tet.class });
    }
    let c = Self::from_parts(self.regions.clone(), self.areas.clone(), self.vertices.clone(), edges, triangles, tets);
    Ok(c)
  }

  /// Orients every edge from the lower to the higher vertex number, then reverses any
  /// defect edge so that it points from its `D`-side to its `C`-side. Requires a
  /// simplicial complex (distinct vertices in every cell) unless already compliant.
  pub fn orient_edges(&self) -> Result<Self> {
    let compliant = self.triangles.iter().all(|t| !t.is_cyclic())
      && (0..self.tets.len()).all(|t| self.frame(t).is_some())
      && self.defect_directions_ok();
    if compliant {
      return Ok(self.clone());
    }
    self.check_transversal_kinds().map_err(Error::NotTransversal)?;
    let mut edges = self.edges.clone();
    for e in &mut edges {
      let forward = match e.kind {
        EdgeKind::Defect(a) if self.areas[a].c_region != self.areas[a].d_region => {
          self.vertices[e.tail] == self.areas[a].d_region
        }
        _ => e.tail < e.head,
      };
      if !forward {
        std::mem::swap(&mut e.tail, &mut e.head);
      }
    }
    let not_simplicial =
      |what: &str, id: usize| Error::InvalidComplex(format!("{what} {id} is not simplicial; cannot re-orient"));
    let mut triangles = Vec::with_capacity(self.triangles.len());
    for (f, t) in self.triangles.iter().enumerate() {
      let mut vs: Vec<usize> = t.edges.iter().flat_map(|&e| [edges[e].tail, edges[e].head]).collect();
      vs.sort_unstable();
      vs.dedup();
      if vs.len() != 3 {
        return Err(not_simplicial("triangle", f));
      }
      let out = |v: usize| t.edges.iter().filter(|&&e| edges[e].tail == v).count();
      vs.sort_by_key(|&v| std::cmp::Reverse(out(v)));
      let find = |a: usize, b: usize| t.edges.iter().copied().find(|&e| edges[e].tail == a && edges[e].head == b);
      match (find(vs[0], vs[1]), find(vs[1], vs[2]), find(vs[0], vs[2])) {
        (Some(a), Some(b), Some(c)) => triangles.push(Triangle::from_branching(a, b, c)),
        _ => return Err(Error::NotTransversal(format!("triangle {f} stays cyclic"))),
      }
    }
    let mut tets = Vec::with_capacity(self.tets.len());
    let mut lost_orientation = false;
    for (t, tet) in self.tets.iter().enumerate() {
      let tet_edges: Vec<usize> = tet.faces.iter().flat_map(|&f| self.triangles[f].edges).collect();
      let mut vs: Vec<usize> = tet_edges.iter().flat_map(|&e| [edges[e].tail, edges[e].head]).collect();
      vs.sort_unstable();
      vs.dedup();
      if vs.len() != 4 {
        return Err(not_simplicial("tet", t));
      }
      let out = |v: usize| {
        let mut heads: Vec<usize> = tet_edges.iter().filter(|&&e| edges[e].tail == v).map(|&e| edges[e].head).collect();
        heads.sort_unstable();
        heads.dedup();
        heads.len()
      };
      vs.sort_by_key(|&v| std::cmp::Reverse(out(v)));
      let mut faces = [0; 4];
      for (i, &v) in vs.iter().enumerate() {
        faces[i] = tet
          .faces
          .iter()
          .copied()
          .find(|&f| self.triangles[f].edges.iter().all(|&e| edges[e].tail != v && edges[e].head != v))
          .ok_or_else(|| not_simplicial("tet", t))?;
      }
      let orient = match self.frame(t) {
        Some(old) => {
          let perm: Vec<usize> = vs.iter().map(|v| old.verts.iter().position(|w| w == v).expect("same vertices")).collect();
          tet.orient * permutation_sign(&perm)
        }
        None => {
          lost_orientation = true;
          tet.orient
        }
      };
      tets.push(Tet { faces, orient, class: tet.class });
    }
    let mut c = Self::from_parts(self.regions.clone(), self.areas.clone(), self.vertices.clone(), edges, triangles, tets);
    c.recompute_classes();
    if lost_orientation {
      c.orient_consistently()?;
    }
    Ok(c)
  }

  fn defect_directions_ok(&self) -> bool {
    self.edges.iter().all(|e| match e.kind {
      EdgeKind::Bulk(_) => true,
      EdgeKind::Defect(a) => {
        let area = &self.areas[a];
        self.vertices[e.tail] == area.d_region && self.vertices[e.head] == area.c_region
      }
    })
  }

  fn check_transversal_kinds(&self) -> std::result::Result<(), String> {
    for (i, e) in self.edges.iter().enumerate() {
      match e.kind {
        EdgeKind::Bulk(r) => {
          if self.vertices[e.tail] != r || self.vertices[e.head] != r {
            return Err(format!("bulk edge {i} leaves region {r}"));
          }
        }
        EdgeKind::Defect(a) => {
          let area = &self.areas[a];
          let ends = [self.vertices[e.tail], self.vertices[e.head]];
          if !(ends == [area.d_region, area.c_region] || ends == [area.c_region, area.d_region]) {
            return Err(format!("defect edge {i} does not join the two sides of area {a}"));
          }
        }
      }
    }
    Ok(())
  }

  /// Replaces the backend name of every area by `name_for(old name)` and swaps `C`/`D`
  /// sides; combined with reversing every defect edge this realises the opposite data.
  pub fn opposite_defects(&self, name_for: impl Fn(&str) -> String) -> Result<Self> {
    let flips: Vec<usize> = (0..self.edges.len()).filter(|&e| self.is_defect_edge(e)).collect();
    let mut c = self.reverse_edges(&flips)?;
    for a in &mut c.areas {
      std::mem::swap(&mut a.c_region, &mut a.d_region);
      a.backend = name_for(&a.backend);
    }
    c.recompute_classes();
    Ok(c)
  }

  /// The defect edges, triangles and tetrahedra of area `a` (the cells of the recovered
  /// defect surface: its vertices, edges and faces respectively).
  pub fn defect_surface(&self, a: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let in_area = |e: usize| self.edges[e].kind == EdgeKind::Defect(a);
    let es: Vec<usize> = (0..self.edges.len()).filter(|&e| in_area(e)).collect();
    let fs: Vec<usize> = (0..self.triangles.len()).filter(|&f| self.triangles[f].edges.iter().any(|&e| in_area(e))).collect();
    let ts: Vec<usize> = (0..self.tets.len())
      .filter(|&t| self.tets[t].faces.iter().any(|&f| self.triangles[f].edges.iter().any(|&e| in_area(e))))
      .collect();
    (es, fs, ts)
  }

  pub(crate) fn set_parts(&mut self, vertices: Vec<usize>, edges: Vec<Edge>, triangles: Vec<Triangle>, tets: Vec<Tet>) {
    self.vertices = vertices;
    self.edges = edges;
    self.triangles = triangles;
    self.tets = tets;
    self.recompute();
  }
}

/// Classifies a framed tetrahedron by its edge kinds.
pub(crate) fn classify_frame(fr: &TetFrame, kind: impl Fn(usize) -> EdgeKind) -> std::result::Result<TetClass, String> {
  let defect: Vec<usize> = (0..6).filter(|&k| matches!(kind(fr.edges[k]), EdgeKind::Defect(_))).collect();
  let areas: Vec<usize> = defect
    .iter()
    .filter_map(|&k| match kind(fr.edges[k]) {
      EdgeKind::Defect(a) => Some(a),
      EdgeKind::Bulk(_) => None,
    })
    .collect();
  if areas.windows(2).any(|w| w[0] != w[1]) {
    return Err("defect edges of several areas in one tetrahedron".into());
  }
  match defect.len() {
    0 => Ok(TetClass::Bulk),
    3 => {
      let common = (0..4).find(|&v| defect.iter().all(|&k| TET_EDGES[k].0 == v || TET_EDGES[k].1 == v));
      match common {
        Some(_) => Ok(TetClass::TypeA),
        None => Err("three defect edges that do not meet at a vertex".into()),
      }
    }
    4 => {
      let bulk: Vec<(usize, usize)> = (0..6).filter(|k| !defect.contains(k)).map(|k| TET_EDGES[k]).collect();
      let (a, b) = (bulk[0], bulk[1]);
      if a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1 {
        Ok(TetClass::TypeB)
      } else {
        Err("four defect edges whose bulk complement is not an opposite pair".into())
      }
    }
    n => Err(format!("{n} defect edges")),
  }
}

/// Sign of a permutation given as an image list.
pub(crate) fn permutation_sign(p: &[usize]) -> i8 {
  let mut sign = 1i8;
  for i in 0..p.len() {
    for j in i + 1..p.len() {
      if p[i] > p[j] {
        sign = -sign;
      }
    }
  }
  sign
}

/// Incremental constructor for simplicial complexes given by vertex quadruples.
///
/// Edges and triangles are shared by vertex set. A new edge is oriented from the earlier
/// to the later vertex of the tetrahedron that introduces it, except that edges between
/// the two sides of an area always run from the `D`-side to the `C`-side.
#[derive(Clone, Debug, Default)]
pub struct ComplexBuilder {
  regions:   Vec<Region>,
  areas:     Vec<Area>,
  vertices:  Vec<usize>,
  edges:     Vec<Edge>,
  triangles: Vec<Triangle>,
  tets:      Vec<Tet>,
  edge_key:  HashMap<(usize, usize), usize>,
  tri_key:   HashMap<[usize; 3], usize>,
}

impl ComplexBuilder {
  /// An empty builder.
  pub fn new() -> Self { Self::default() }

  /// Adds a region with the given backend name.
  pub fn add_region(&mut self, backend: &str) -> usize {
    self.regions.push(Region { backend: backend.to_string() });
    self.regions.len() - 1
  }

  /// Adds a defect area between two distinct regions.
  pub fn add_area(&mut self, backend: &str, c_region: usize, d_region: usize) -> usize {
    self.areas.push(Area { backend: backend.to_string(), c_region, d_region });
    self.areas.len() - 1
  }

  /// Adds a vertex in a region.
  pub fn add_vertex(&mut self, region: usize) -> usize {
    self.vertices.push(region);
    self.vertices.len() - 1
  }

  /// Adds `n` vertices in a region, returning their ids.
  pub fn add_vertices(&mut self, region: usize, n: usize) -> Vec<usize> { (0..n).map(|_| self.add_vertex(region)).collect() }

  fn edge_kind(&self, a: usize, b: usize) -> Result<(EdgeKind, bool)> {
    let (ra, rb) = (self.vertices[a], self.vertices[b]);
    if ra == rb {
      return Ok((EdgeKind::Bulk(ra), false));
    }
    for (i, area) in self.areas.iter().enumerate() {
      if area.d_region == ra && area.c_region == rb {
        return Ok((EdgeKind::Defect(i), false));
      }
      if area.c_region == ra && area.d_region == rb {
        return Ok((EdgeKind::Defect(i), true));
      }
    }
    Err(Error::InvalidComplex(format!("no area separates regions {ra} and {rb}")))
  }

  /// The edge between two vertices, creating it (directed `a → b` unless forced
  /// otherwise) if needed.
  pub fn edge(&mut self, a: usize, b: usize) -> Result<usize> {
    let key = (a.min(b), a.max(b));
    if let Some(&e) = self.edge_key.get(&key) {
      return Ok(e);
    }
    if a == b {
      return Err(Error::InvalidComplex(format!("degenerate edge at vertex {a}")));
    }
    let (kind, reverse) = self.edge_kind(a, b)?;
    let (tail, head) = if reverse { (b, a) } else { (a, b) };
    self.edges.push(Edge { tail, head, kind });
    let e = self.edges.len() - 1;
    self.edge_key.insert(key, e);
    Ok(e)
  }

  fn triangle(&mut self, vs: [usize; 3]) -> Result<usize> {
    let mut key = vs;
    key.sort_unstable();
    if let Some(&f) = self.tri_key.get(&key) {
      return Ok(f);
    }
    let e = [self.edge(vs[0], vs[1])?, self.edge(vs[1], vs[2])?, self.edge(vs[0], vs[2])?];
    let signs = [
      if self.edges[e[0]].tail == vs[0] { 1 } else { -1 },
      if self.edges[e[1]].tail == vs[1] { 1 } else { -1 },
      if self.edges[e[2]].tail == vs[2] { 1 } else { -1 },
    ];
    let tri = Triangle { edges: e, signs }
      .canonical()
      .ok_or_else(|| Error::InvalidComplex(format!("triangle on {vs:?} would be a directed cycle")))?;
    self.triangles.push(tri);
    let f = self.triangles.len() - 1;
    self.tri_key.insert(key, f);
    Ok(f)
  }

  /// Adds the tetrahedron on four distinct vertices; `orient` refers to the given vertex
  /// order. Returns its id.
  pub fn add_tet(&mut self, vs: [usize; 4], orient: i8) -> Result<usize> {
    for (i, j) in TET_EDGES {
      self.edge(vs[i], vs[j])?;
    }
    // Branching order: sort by out-degree within the tetrahedron.
    let out = |me: &Self, v: usize| {
      vs.iter().filter(|&&w| w != v && me.edges[me.edge_key[&(v.min(w), v.max(w))]].tail == v).count()
    };
    let mut perm: Vec<usize> = (0..4).collect();
    perm.sort_by_key(|&i| std::cmp::Reverse(out(self, vs[i])));
    let order: Vec<usize> = perm.iter().map(|&i| vs[i]).collect();
    for a in 0..4 {
      for b in a + 1..4 {
        let e = self.edge_key[&(order[a].min(order[b]), order[a].max(order[b]))];
        if self.edges[e].tail != order[a] {
          return Err(Error::InvalidComplex(format!("edge directions on {vs:?} contain a cycle")));
        }
      }
    }
    let mut faces = [0; 4];
    for (i, face) in TET_FACES.iter().enumerate() {
      faces[i] = self.triangle([order[face[0]], order[face[1]], order[face[2]]])?;
    }
    self.tets.push(Tet { faces, orient: orient * permutation_sign(&perm), class: TetClass::Bulk });
    Ok(self.tets.len() - 1)
  }

  /// Finishes the complex, computing tet classes.
  pub fn build(self) -> DefectComplex {
    let mut c = DefectComplex::from_parts(self.regions, self.areas, self.vertices, self.edges, self.triangles, self.tets);
    c.recompute_classes();
    c
  }

  /// Finishes the complex and orients it consistently from the first tetrahedron.
  pub fn build_oriented(self) -> Result<DefectComplex> {
    let mut c = self.build();
    c.orient_consistently()?;
    Ok(c)
  }
}
