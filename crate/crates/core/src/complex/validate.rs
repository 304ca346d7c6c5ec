//! Invariant checks producing a report of every violation.

use std::collections::BTreeSet;
use std::fmt;

use super::{DefectComplex, EdgeKind, TET_FACES};

/// Category of a validation failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
  /// A cell references an id that does not exist.
  DanglingId,
  /// A triangle's edges do not form a closed cycle.
  OpenTriangle,
  /// A triangle's edges form a directed cycle; branching orders forbid this.
  CyclicTriangle,
  /// A defect edge does not point from the `D`-side to the `C`-side.
  DefectDirection,
  /// A bulk edge joins vertices outside its region, or a defect edge does not join the
  /// two sides of its area.
  RegionMismatch,
  /// A triangle has a number of defect edges other than 0 or 2.
  DefectTriangle,
  /// A tetrahedron's faces do not fit together.
  InconsistentTet,
  /// A tetrahedron's defect edges do not form a type-a or type-b pattern.
  Transversality,
  /// A tetrahedron's stored class disagrees with its defect edges.
  ClassMismatch,
  /// A triangle lies in zero or more than two tetrahedra.
  Incidence,
  /// An internal triangle receives equal induced orientations from its two tetrahedra.
  Orientation,
  /// A vertex link is not a sphere or disc (optional check).
  VertexLink,
}

/// A violated invariant with the offending cell ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
  /// Category.
  pub kind:    ViolationKind,
  /// Offending cell ids (their kind depends on the category).
  pub cells:   Vec<usize>,
  /// Human-readable description.
  pub message: String,
}

/// Options for [`validate_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidateOptions {
  /// Also check that every vertex link is a connected 2-sphere (internal vertices) or
  /// 2-disc (boundary vertices) by Euler characteristic.
  pub check_links: bool,
}

/// The list of violated invariants; empty iff the complex is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
  /// Every violation found.
  pub violations: Vec<Violation>,
}

impl ValidationReport {
  /// Whether no invariant is violated.
  pub fn is_ok(&self) -> bool { self.violations.is_empty() }

  /// Whether some violation has the given kind.
  pub fn has(&self, kind: ViolationKind) -> bool { self.violations.iter().any(|v| v.kind == kind) }

  fn push(&mut self, kind: ViolationKind, cells: Vec<usize>, message: String) {
    self.violations.push(Violation { kind, cells, message });
  }
}

impl fmt::Display for ValidationReport {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.violations.is_empty() {
      return writeln!(f, "ok");
    }
    for v in &self.violations {
      writeln!(f, "{:?} {:?}: {}", v.kind, v.cells, v.message)?;
    }
    Ok(())
  }
}

/// Validates with default options.
pub fn validate(c: &DefectComplex) -> ValidationReport { validate_with(c, ValidateOptions::default()) }

/// Checks every structural invariant of a defect complex.
pub fn validate_with(c: &DefectComplex, opts: ValidateOptions) -> ValidationReport {
  let mut r = ValidationReport::default();
  let nv = c.vertices.len();
  for (i, &reg) in c.vertices.iter().enumerate() {
    if reg >= c.regions.len() {
      r.push(ViolationKind::DanglingId, vec![i], format!("vertex {i} references region {reg}"));
    }
  }
  for (i, a) in c.areas.iter().enumerate() {
    if a.c_region >= c.regions.len() || a.d_region >= c.regions.len() {
      r.push(ViolationKind::DanglingId, vec![i], format!("area {i} references a missing region"));
    }
  }
  if !r.is_ok() {
    return r;
  }
  for (i, e) in c.edges.iter().enumerate() {
    if e.tail >= nv || e.head >= nv {
      r.push(ViolationKind::DanglingId, vec![i], format!("edge {i} references a missing vertex"));
      continue;
    }
    match e.kind {
      EdgeKind::Bulk(reg) => {
        if reg >= c.regions.len() {
          r.push(ViolationKind::DanglingId, vec![i], format!("edge {i} references region {reg}"));
        } else if c.vertices[e.tail] != reg || c.vertices[e.head] != reg {
          r.push(ViolationKind::RegionMismatch, vec![i], format!("bulk edge {i} of region {reg} leaves its region"));
        }
      }
      EdgeKind::Defect(a) => {
        if a >= c.areas.len() {
          r.push(ViolationKind::DanglingId, vec![i], format!("edge {i} references area {a}"));
          continue;
        }
        let area = &c.areas[a];
        let (rt, rh) = (c.vertices[e.tail], c.vertices[e.head]);
        if (rt, rh) == (area.d_region, area.c_region) {
          continue;
        }
        if (rt, rh) == (area.c_region, area.d_region) {
          r.push(ViolationKind::DefectDirection, vec![i], format!("defect edge {i} points from the C-side to the D-side"));
        } else {
          r.push(ViolationKind::RegionMismatch, vec![i], format!("defect edge {i} does not join the sides of area {a}"));
        }
      }
    }
  }
  if r.has(ViolationKind::DanglingId) {
    return r;
  }
  let ne = c.edges.len();
  for (f, t) in c.triangles.iter().enumerate() {
    if t.edges.iter().any(|&e| e >= ne) {
      r.push(ViolationKind::DanglingId, vec![f], format!("triangle {f} references a missing edge"));
      continue;
    }
    // Closed cycle: the end of each traversed edge is the start of the next.
    let ends = |i: usize| {
      let e = c.edges[t.edges[i]];
      if t.signs[i] > 0 { (e.tail, e.head) } else { (e.head, e.tail) }
    };
    if !(0..3).all(|i| ends(i).1 == ends((i + 1) % 3).0) {
      r.push(ViolationKind::OpenTriangle, vec![f], format!("triangle {f} is not a closed cycle"));
      continue;
    }
    if t.is_cyclic() {
      r.push(ViolationKind::CyclicTriangle, vec![f], format!("triangle {f} is a directed cycle"));
    }
    let defects: Vec<usize> = t.edges.iter().copied().filter(|&e| c.is_defect_edge(e)).collect();
    if !defects.is_empty() && defects.len() != 2 {
      r.push(ViolationKind::DefectTriangle, vec![f], format!("triangle {f} has {} defect edges", defects.len()));
    } else if defects.len() == 2 && c.edges[defects[0]].kind != c.edges[defects[1]].kind {
      r.push(ViolationKind::DefectTriangle, vec![f], format!("triangle {f} mixes defect areas"));
    }
  }
  let nf = c.triangles.len();
  for (t, tet) in c.tets.iter().enumerate() {
    if tet.faces.iter().any(|&f| f >= nf) {
      r.push(ViolationKind::DanglingId, vec![t], format!("tet {t} references a missing triangle"));
      continue;
    }
    if tet.orient != 1 && tet.orient != -1 {
      r.push(ViolationKind::InconsistentTet, vec![t], format!("tet {t} has orientation {}", tet.orient));
    }
    let Some(fr) = c.frame(t) else {
      r.push(ViolationKind::InconsistentTet, vec![t], format!("tet {t} faces do not fit together"));
      continue;
    };
    match super::classify_frame(&fr, |e| c.edges[e].kind) {
      Ok(class) => {
        if class != tet.class {
          r.push(
            ViolationKind::ClassMismatch,
            vec![t],
            format!("tet {t} is stored as {} but its defect edges make it {}", tet.class.token(), class.token()),
          );
        }
      }
      Err(why) => r.push(ViolationKind::Transversality, vec![t], format!("tet {t}: {why}")),
    }
  }
  if r.has(ViolationKind::DanglingId) {
    return r;
  }
  for f in 0..nf {
    let inc = c.triangle_tets(f);
    match inc.len() {
      1 => {}
      2 => {
        let (a, b) = (inc[0], inc[1]);
        if c.induced_sign(a.0, a.1) == c.induced_sign(b.0, b.1) {
          r.push(ViolationKind::Orientation, vec![f, a.0, b.0], format!("triangle {f} gets equal induced orientations"));
        }
      }
      n => r.push(ViolationKind::Incidence, vec![f], format!("triangle {f} lies in {n} tetrahedra")),
    }
  }
  if opts.check_links && r.is_ok() {
    check_links(c, &mut r);
  }
  r
}

/// Link of each vertex as a 2-complex of corner triangles; checks connectivity and Euler
/// characteristic (2 for internal vertices, 1 for boundary vertices).
///
/// Every corner `(tet, i)` is a link triangle whose vertices are the directions `j ≠ i`
/// and whose edges are the faces of the tet containing `i`. Gluing across internal faces
/// identifies link edges and link vertices; corner triangles are counted individually.
fn check_links(c: &DefectComplex, r: &mut ValidationReport) {
  let nt = c.tets.len();
  let slot = |t: usize, i: usize, j: usize| t * 12 + i * 3 + if j < i { j } else { j - 1 };
  let mut edge_uf = UnionFind::new(nt * 12);
  let mut vert_uf = UnionFind::new(nt * 12);
  let mut corner_uf = UnionFind::new(nt * 4);
  for f in 0..c.triangles.len() {
    let inc = c.triangle_tets(f);
    if inc.len() != 2 {
      continue;
    }
    let ((t1, s1), (t2, s2)) = (inc[0], inc[1]);
    let (c1, c2) = (TET_FACES[s1], TET_FACES[s2]);
    for k in 0..3 {
      corner_uf.union(t1 * 4 + c1[k], t2 * 4 + c2[k]);
      edge_uf.union(slot(t1, c1[k], s1), slot(t2, c2[k], s2));
      for m in (0..3).filter(|&m| m != k) {
        vert_uf.union(slot(t1, c1[k], c1[m]), slot(t2, c2[k], c2[m]));
      }
    }
  }
  let mut corners_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); c.vertices.len()];
  for t in 0..nt {
    let fr = c.frame_unchecked(t);
    for i in 0..4 {
      corners_at[fr.verts[i]].push((t, i));
    }
  }
  for (v, corners) in corners_at.iter().enumerate() {
    if corners.is_empty() {
      r.push(ViolationKind::VertexLink, vec![v], format!("vertex {v} lies in no tetrahedron"));
      continue;
    }
    let mut edges = BTreeSet::new();
    let mut verts = BTreeSet::new();
    let mut comps = BTreeSet::new();
    for &(t, i) in corners {
      comps.insert(corner_uf.find(t * 4 + i));
      for j in (0..4).filter(|&j| j != i) {
        edges.insert(edge_uf.find(slot(t, i, j)));
        verts.insert(vert_uf.find(slot(t, i, j)));
      }
    }
    let chi = verts.len() as i64 - edges.len() as i64 + corners.len() as i64;
    let want = if c.is_boundary_vertex(v) { 1 } else { 2 };
    if chi != want || comps.len() != 1 {
      r.push(
        ViolationKind::VertexLink,
        vec![v],
        format!("vertex {v} link has Euler characteristic {chi} and {} components (want {want}, 1)", comps.len()),
      );
    }
  }
}

/// Disjoint-set forest with path halving.
pub(crate) struct UnionFind {
  parent: Vec<usize>,
}

impl UnionFind {
  pub(crate) fn new(n: usize) -> Self { Self { parent: (0..n).collect() } }

  pub(crate) fn find(&mut self, mut x: usize) -> usize {
    while self.parent[x] != x {
      self.parent[x] = self.parent[self.parent[x]];
      x = self.parent[x];
    }
    x
  }

  /// Merges the classes of `a` and `b`, keeping the smaller representative.
  pub(crate) fn union(&mut self, a: usize, b: usize) {
    let (ra, rb) = (self.find(a), self.find(b));
    if ra != rb {
      self.parent[ra.max(rb)] = ra.min(rb);
    }
  }
}
