//! Polygon diagrams over group data.
//!
//! A [`PolygonDiagram`] is a disc whose boundary is a cyclic sequence of segments
//! labeled by biset elements, separated by corners. Interior lines in two layers, `C`
//! and `D`, are labeled by elements of the left and right groups; each line runs between
//! two places, each place being an interior vertex or a boundary corner. Planarity is
//! recorded by rotation systems: every vertex lists its line ends counterclockwise, and
//! every corner lists its attachments in boundary order. The boundary is read
//! counterclockwise: segment `k`, then corner `k`, then segment `k + 1`.
//!
//! For group data with trivial cocycles every hom space is at most one-dimensional, so
//! a labeled diagram evaluates to `1` or `0`:
//!
//! * at each corner, `next = c ▷ prev ◁ d`, applying the attachments in order, where a
//!   `C` line acts on the left and a `D` line on the right;
//! * at each vertex, the ends composed counterclockwise give the identity, as left
//!   actions for `C` (`gᵣ⋯g₁g₀ = e`) and as right actions for `D` (`g₀g₁⋯gᵣ = e`).
//!
//! A line contributes its label where it points into a corner or out of a vertex, and
//! the inverse label at its other end.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{BiSet, FiniteGroup};
use crate::complex::{is_fine_neighbourhood, DefectComplex, EdgeKind, UnionFind};
use crate::error::{Error, Result};
use crate::statesum::{BoundaryData, Theory};
use crate::ScalarValue;

/// The layer of an interior line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
  /// Lines labeled by the left group, acting on the left.
  C,
  /// Lines labeled by the right group, acting on the right.
  D,
}

/// One end of a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum End {
  /// The end the line points to.
  Head,
  /// The end the line starts from.
  Tail,
}

impl End {
  fn flip(self) -> Self {
    match self {
      End::Head => End::Tail,
      End::Tail => End::Head,
    }
  }
}

/// An interior line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Line {
  /// Its layer.
  pub layer: Layer,
  /// Its group element.
  pub label: usize,
}

/// A line end at a place: `(line id, which end)`.
pub type Attachment = (usize, End);

/// A planar diagram on a polygon, labeled by group data. See the module docs for the
/// conventions. Diagrams without corners are closed diagrams on the sphere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonDiagram {
  biset:    BiSet,
  segments: Vec<usize>,
  corners:  Vec<Vec<Attachment>>,
  lines:    Vec<Line>,
  vertices: Vec<Vec<Attachment>>,
}

fn malformed(msg: impl Into<String>) -> Error { Error::MalformedDiagram(msg.into()) }

fn mismatch(msg: impl Into<String>) -> Error { Error::PatternMismatch(msg.into()) }

impl PolygonDiagram {
  /// Assembles and checks a diagram: one segment per corner, labels in range, every
  /// line with exactly one head and one tail, single-layer vertices, and a planar
  /// rotation system in each layer.
  pub fn new(
    biset: BiSet,
    segments: Vec<usize>,
    corners: Vec<Vec<Attachment>>,
    lines: Vec<Line>,
    vertices: Vec<Vec<Attachment>>,
  ) -> Result<Self> {
    let d = Self { biset, segments, corners, lines, vertices };
    d.check()?;
    Ok(d)
  }

  /// A closed diagram (no boundary).
  pub fn closed(biset: BiSet, lines: Vec<Line>, vertices: Vec<Vec<Attachment>>) -> Result<Self> {
    Self::new(biset, Vec::new(), Vec::new(), lines, vertices)
  }

  fn group(&self, layer: Layer) -> &FiniteGroup {
    match layer {
      Layer::C => self.biset.left_group(),
      Layer::D => self.biset.right_group(),
    }
  }

  fn check(&self) -> Result<()> {
    if self.segments.len() != self.corners.len() {
      return Err(malformed(format!("{} segments but {} corners", self.segments.len(), self.corners.len())));
    }
    if let Some(&x) = self.segments.iter().find(|&&x| x >= self.biset.size()) {
      return Err(malformed(format!("segment label {x} outside the biset")));
    }
    for (l, line) in self.lines.iter().enumerate() {
      if line.label >= self.group(line.layer).order() {
        return Err(malformed(format!("line {l} has label {} outside its group", line.label)));
      }
    }
    let mut seen = vec![[0usize; 2]; self.lines.len()];
    for &(l, end) in self.corners.iter().chain(&self.vertices).flatten() {
      let slot = seen.get_mut(l).ok_or_else(|| malformed(format!("attachment references missing line {l}")))?;
      slot[(end == End::Tail) as usize] += 1;
    }
    if let Some(l) = seen.iter().position(|s| *s != [1, 1]) {
      return Err(malformed(format!("line {l} does not have exactly one head and one tail")));
    }
    for (v, ends) in self.vertices.iter().enumerate() {
      match ends.first() {
        None => return Err(malformed(format!("vertex {v} has no ends"))),
        Some(&(l, _)) => {
          if ends.iter().any(|&(m, _)| self.lines[m].layer != self.lines[l].layer) {
            return Err(malformed(format!("vertex {v} joins lines of both layers")));
          }
        }
      }
    }
    for layer in [Layer::C, Layer::D] {
      self.check_planar(layer)?;
    }
    Ok(())
  }

  /// Euler-characteristic test of the combinatorial map formed by the boundary cycle
  /// and the lines of one layer.
  fn check_planar(&self, layer: Layer) -> Result<()> {
    let n = self.corners.len();
    let in_layer = |&(l, _): &Attachment| self.lines[l].layer == layer;
    // Darts: 2l (+1 for the head) for lines, then 2s, 2s + 1 for the back (at corner
    // s − 1) and front (at corner s) halves of segment s.
    let nl = self.lines.len();
    let line_dart = |(l, e): Attachment| 2 * l + (e == End::Head) as usize;
    let seg_back = |s: usize| 2 * nl + 2 * s;
    let seg_front = |s: usize| 2 * nl + 2 * s + 1;
    let total = 2 * nl + 2 * n;
    let mut sigma = vec![usize::MAX; total];
    let mut node_of = vec![usize::MAX; total];
    let mut nodes = 0;
    let mut link = |cycle: &[usize], sigma: &mut Vec<usize>, node_of: &mut Vec<usize>| {
      for (i, &d) in cycle.iter().enumerate() {
        sigma[d] = cycle[(i + 1) % cycle.len()];
        node_of[d] = nodes;
      }
      nodes += 1;
    };
    for k in 0..n {
      let mut cycle = vec![seg_back((k + 1) % n)];
      cycle.extend(self.corners[k].iter().rev().filter(|a| in_layer(a)).map(|&a| line_dart(a)));
      cycle.push(seg_front(k));
      link(&cycle, &mut sigma, &mut node_of);
    }
    for ends in &self.vertices {
      if in_layer(&ends[0]) {
        let cycle: Vec<usize> = ends.iter().map(|&a| line_dart(a)).collect();
        link(&cycle, &mut sigma, &mut node_of);
      }
    }
    let alpha = |d: usize| d ^ 1;
    let darts: Vec<usize> = (0..total).filter(|&d| sigma[d] != usize::MAX).collect();
    let mut faces = 0;
    let mut visited = vec![false; total];
    for &d in &darts {
      if visited[d] {
        continue;
      }
      faces += 1;
      let mut x = d;
      while !visited[x] {
        visited[x] = true;
        x = sigma[alpha(x)];
      }
    }
    let mut uf = UnionFind::new(nodes);
    for &d in &darts {
      uf.union(node_of[d], node_of[alpha(d)]);
    }
    let components = (0..nodes).filter(|&v| uf.find(v) == v).count();
    let edges = darts.len() / 2;
    if nodes as i64 - edges as i64 + faces as i64 != 2 * components as i64 {
      return Err(malformed(format!("the {layer:?} layer is not planar")));
    }
    Ok(())
  }

  /// The biset labeling the segments.
  pub fn biset(&self) -> &BiSet { &self.biset }

  /// Segment labels in boundary order.
  pub fn segments(&self) -> &[usize] { &self.segments }

  /// Corner attachments in boundary order.
  pub fn corners(&self) -> &[Vec<Attachment>] { &self.corners }

  /// The interior lines.
  pub fn lines(&self) -> &[Line] { &self.lines }

  /// Vertex rotations.
  pub fn vertices(&self) -> &[Vec<Attachment>] { &self.vertices }

  /// Number of corners (equal to the number of segments).
  pub fn num_corners(&self) -> usize { self.corners.len() }

  /// Whether the diagram has no boundary.
  pub fn is_closed(&self) -> bool { self.corners.is_empty() }

  /// The same diagram with segment `k` relabeled.
  pub fn with_segment(&self, k: usize, x: usize) -> Result<Self> {
    let mut d = self.clone();
    *d.segments.get_mut(k).ok_or_else(|| malformed(format!("no segment {k}")))? = x;
    d.check()?;
    Ok(d)
  }

  /// The same diagram with line `l` relabeled.
  pub fn with_line_label(&self, l: usize, g: usize) -> Result<Self> {
    let mut d = self.clone();
    d.lines.get_mut(l).ok_or_else(|| malformed(format!("no line {l}")))?.label = g;
    d.check()?;
    Ok(d)
  }

  /// The boundary read from corner `r` on: segment `r` becomes segment `0`.
  pub fn rotated(&self, r: usize) -> Self {
    let mut d = self.clone();
    if !d.segments.is_empty() {
      let r = r % d.segments.len();
      d.segments.rotate_left(r);
      d.corners.rotate_left(r);
    }
    d
  }

  fn element(&self, (l, end): Attachment, at_corner: bool) -> usize {
    let line = self.lines[l];
    let forward = (end == End::Head) == at_corner;
    if forward { line.label } else { self.group(line.layer).inv(line.label) }
  }

  /// Whether every corner and vertex constraint holds.
  pub fn holds(&self) -> bool {
    let n = self.corners.len();
    for k in 0..n {
      let mut x = self.segments[k];
      for &a in &self.corners[k] {
        let g = self.element(a, true);
        x = match self.lines[a.0].layer {
          Layer::C => self.biset.act_left(g, x),
          Layer::D => self.biset.act_right(x, g),
        };
      }
      if x != self.segments[(k + 1) % n] {
        return false;
      }
    }
    self.vertices.iter().all(|ends| {
      let layer = self.lines[ends[0].0].layer;
      let group = self.group(layer);
      let total = ends.iter().fold(group.identity(), |acc, &a| {
        let g = self.element(a, false);
        match layer {
          Layer::C => group.mul(g, acc),
          Layer::D => group.mul(acc, g),
        }
      });
      total == group.identity()
    })
  }
}

/// The evaluation: `1` if every constraint holds, else `0`.
pub fn evaluate(d: &PolygonDiagram) -> ScalarValue { if d.holds() { ScalarValue::one() } else { ScalarValue::zero() } }

/// Pieces of a diagram under surgery.
struct Parts {
  segments: Vec<usize>,
  corners:  Vec<Vec<Attachment>>,
  lines:    Vec<Line>,
  vertices: Vec<Vec<Attachment>>,
}

impl Parts {
  fn of(d: &PolygonDiagram) -> Self {
    Self { segments: Vec::new(), corners: Vec::new(), lines: d.lines.clone(), vertices: d.vertices.clone() }
  }

  /// Appends the lines and vertices of `d`, returning the line-id offset.
  fn absorb(&mut self, d: &PolygonDiagram) -> usize {
    let off = self.lines.len();
    self.lines.extend(d.lines.iter().copied());
    self.vertices.extend(d.vertices.iter().map(|v| v.iter().map(|&(l, e)| (l + off, e)).collect()));
    off
  }

  /// Joins the lines at pairs of removed ends: each pair holds one head and one tail,
  /// and the line arriving at the head continues as the line leaving from the tail. Lines
  /// joined into a closed loop get a two-valent vertex.
  fn connect(&mut self, pairs: &[(Attachment, Attachment)]) -> Result<()> {
    let nl = self.lines.len();
    let mut succ = vec![usize::MAX; nl];
    let mut pred = vec![usize::MAX; nl];
    for &(a, b) in pairs {
      let (h, t) = match (a.1, b.1) {
        (End::Head, End::Tail) => (a.0, b.0),
        (End::Tail, End::Head) => (b.0, a.0),
        _ => return Err(mismatch(format!("lines {} and {} meet with the same orientation", a.0, b.0))),
      };
      if self.lines[h] != self.lines[t] {
        return Err(mismatch(format!("lines {h} and {t} carry different layers or labels")));
      }
      succ[h] = t;
      pred[t] = h;
    }
    // Chain representatives: the first line of an open chain, or the smallest of a loop.
    let mut rep = vec![usize::MAX; nl];
    let mut loops = Vec::new();
    for l in 0..nl {
      if rep[l] != usize::MAX {
        continue;
      }
      let mut start = l;
      let mut closed = false;
      while pred[start] != usize::MAX {
        start = pred[start];
        if start == l {
          closed = true;
          break;
        }
      }
      let mut members = vec![start];
      let mut x = succ[start];
      while x != usize::MAX && x != start {
        members.push(x);
        x = succ[x];
      }
      let r = if closed { *members.iter().min().unwrap() } else { start };
      for &m in &members {
        rep[m] = r;
      }
      if closed {
        loops.push(r);
      }
    }
    let mut new_id = vec![usize::MAX; nl];
    let mut lines = Vec::new();
    for l in 0..nl {
      if rep[l] == l {
        new_id[l] = lines.len();
        lines.push(self.lines[l]);
      }
    }
    let remap = |ends: &mut Vec<Attachment>| {
      for a in ends.iter_mut() {
        a.0 = new_id[rep[a.0]];
      }
    };
    self.corners.iter_mut().for_each(remap);
    self.vertices.iter_mut().for_each(remap);
    for r in loops {
      self.vertices.push(vec![(new_id[r], End::Head), (new_id[r], End::Tail)]);
    }
    self.lines = lines;
    Ok(())
  }

  fn finish(self, biset: BiSet) -> Result<PolygonDiagram> {
    PolygonDiagram::new(biset, self.segments, self.corners, self.lines, self.vertices)
  }
}

fn mirror_pairs(a: &[Attachment], b: &[Attachment], b_off: usize) -> Result<Vec<(Attachment, Attachment)>> {
  if a.len() != b.len() {
    return Err(mismatch(format!("corners carry {} and {} lines", a.len(), b.len())));
  }
  Ok(a.iter().zip(b.iter().rev()).map(|(&x, &(l, e))| (x, (l + b_off, e))).collect())
}

/// Glues corner `k1` of `d1` to corner `k2` of `d2`. The corners must look like mirror
/// images: segments `m, n` around `k1` and `n, m` around `k2`, and the same lines
/// attached in reverse order with opposite orientation. The corners disappear, the
/// segments `m` and `n` are merged and the attached lines are joined, so that
/// `ev(d1) · ev(d2) = ev(glue_sides(d1, k1, d2, k2))`.
pub fn glue_sides(d1: &PolygonDiagram, k1: usize, d2: &PolygonDiagram, k2: usize) -> Result<PolygonDiagram> {
  if d1.biset != d2.biset {
    return Err(mismatch("diagrams over different bisets"));
  }
  let (n1, n2) = (d1.num_corners(), d2.num_corners());
  if k1 >= n1 || k2 >= n2 {
    return Err(mismatch(format!("corner {k1} or {k2} does not exist")));
  }
  let (m, n) = (d1.segments[k1], d1.segments[(k1 + 1) % n1]);
  if d2.segments[k2] != n || d2.segments[(k2 + 1) % n2] != m {
    return Err(mismatch("segment labels around the glued corners do not match"));
  }
  let mut p = Parts::of(d1);
  let off = p.absorb(d2);
  let pairs = mirror_pairs(&d1.corners[k1], &d2.corners[k2], off)?;
  for j in 1..n1 {
    p.segments.push(d1.segments[(k1 + j) % n1]);
    p.corners.push(d1.corners[(k1 + j) % n1].clone());
  }
  for j in 1..n2 {
    p.segments.push(d2.segments[(k2 + j) % n2]);
    p.corners.push(d2.corners[(k2 + j) % n2].iter().map(|&(l, e)| (l + off, e)).collect());
  }
  p.connect(&pairs)?;
  p.finish(d1.biset.clone())
}

/// Folds the boundary at segment `k + 1`: corners `k` and `k + 1` must be mirror
/// images and segments `k` and `k + 2` must carry the same label. The two corners and
/// the segment between them disappear, so that summing `d` over the label of segment
/// `k + 1` gives the evaluation of the result.
pub fn fold_vertex(d: &PolygonDiagram, k: usize) -> Result<PolygonDiagram> {
  let n = d.num_corners();
  if n < 3 {
    return Err(mismatch(format!("folding needs at least three corners, found {n}")));
  }
  if k >= n {
    return Err(mismatch(format!("corner {k} does not exist")));
  }
  if d.segments[k] != d.segments[(k + 2) % n] {
    return Err(mismatch("segments on both sides of the fold differ"));
  }
  let pairs = mirror_pairs(&d.corners[k], &d.corners[(k + 1) % n], 0)?;
  let mut p = Parts::of(d);
  for j in 2..n {
    p.segments.push(d.segments[(k + j) % n]);
    p.corners.push(d.corners[(k + j) % n].clone());
  }
  p.connect(&pairs)?;
  p.finish(d.biset.clone())
}

/// Closes a 2-gon whose corners are mirror images into a closed diagram, joining the
/// lines across. Summing the 2-gon over both segment labels gives `|X|` times the
/// evaluation of the result.
pub fn glue_2gon(d: &PolygonDiagram) -> Result<PolygonDiagram> {
  if d.num_corners() != 2 {
    return Err(mismatch(format!("expected a 2-gon, found {} corners", d.num_corners())));
  }
  let pairs = mirror_pairs(&d.corners[0], &d.corners[1], 0)?;
  let mut p = Parts::of(d);
  p.connect(&pairs)?;
  p.finish(d.biset.clone())
}

/// Inserts a closed single-layer diagram `b` into `d`. With `splice = Some((l, m))`,
/// line `l` of `d` is cut and reconnected through line `m` of `b`, which must carry the
/// same layer and label; then `ev(d) · ev(b) = ev(result)`.
pub fn insert_bulk(d: &PolygonDiagram, b: &PolygonDiagram, splice: Option<(usize, usize)>) -> Result<PolygonDiagram> {
  if d.biset != b.biset {
    return Err(mismatch("diagrams over different bisets"));
  }
  if !b.is_closed() {
    return Err(mismatch("the inserted diagram has a boundary"));
  }
  if b.lines.windows(2).any(|w| w[0].layer != w[1].layer) {
    return Err(mismatch("the inserted diagram mixes layers"));
  }
  let mut p = Parts::of(d);
  p.segments = d.segments.clone();
  p.corners = d.corners.clone();
  let off = p.absorb(b);
  if let Some((l, m)) = splice {
    let m = m + off;
    if l >= d.lines.len() || m >= p.lines.len() {
      return Err(mismatch("splice references a missing line"));
    }
    if p.lines[l] != p.lines[m] {
      return Err(mismatch("spliced lines carry different layers or labels"));
    }
    for a in p.corners.iter_mut().chain(p.vertices.iter_mut()).flatten() {
      if *a == (l, End::Head) {
        *a = (m, End::Head);
      } else if *a == (m, End::Head) {
        *a = (l, End::Head);
      }
    }
  }
  p.finish(d.biset.clone())
}

/// The diagram of a fine neighbourhood of a defect disc: the dual graph of the boundary
/// triangulation projected onto the disc, labeled by `b`. Corners are the boundary
/// defect triangles, segments the boundary defect edges, `C` and `D` lines the duals of
/// the boundary bulk edges, and interior vertices the boundary bulk triangles. Its
/// evaluation equals the rescaled state sum.
pub fn project_fine_disc(theory: &Theory, c: &DefectComplex, b: &BoundaryData) -> Result<PolygonDiagram> {
  let not_disc = |msg: String| Error::NotADiscNeighbourhood(msg);
  if c.areas().len() != 1 {
    return Err(not_disc(format!("expected one defect area, found {}", c.areas().len())));
  }
  let area = c.areas()[0].clone();
  let (es, fs, ts) = c.defect_surface(0);
  if ts.len() != c.tets().len() {
    return Err(not_disc("some tetrahedra do not meet the defect surface".into()));
  }
  if !is_fine_neighbourhood(c, 0) {
    return Err(not_disc("the tetrahedra do not form a fine neighbourhood".into()));
  }
  if es.len() as i64 - fs.len() as i64 + ts.len() as i64 != 1 {
    return Err(not_disc("the defect surface has Euler characteristic different from 1".into()));
  }
  // Connectivity of the defect surface through its edges (cell edges join cell vertices).
  let index: HashMap<usize, usize> = es.iter().enumerate().map(|(i, &e)| (e, i)).collect();
  let mut uf = UnionFind::new(es.len());
  for &f in &fs {
    let d: Vec<usize> = c.triangles()[f].edges.iter().filter_map(|e| index.get(e).copied()).collect();
    uf.union(d[0], d[1]);
  }
  if (0..es.len()).filter(|&i| uf.find(i) == i).count() != 1 {
    return Err(not_disc("the defect surface is not connected".into()));
  }
  let biset = theory.bimodule(&area.backend)?.biset().clone();
  let cg = theory.fusion(&c.regions()[area.c_region].backend)?.group();
  let dg = theory.fusion(&c.regions()[area.d_region].backend)?.group();
  if cg != biset.left_group() || dg != biset.right_group() {
    return Err(mismatch("region groups differ from the groups of the biset"));
  }
  let mut label = HashMap::new();
  for e in c.boundary_edges() {
    let x = b.label(e).ok_or_else(|| Error::IncompleteBoundary(format!("boundary edge {e} is unlabeled")))?;
    let bound = match c.edges()[e].kind {
      EdgeKind::Defect(_) => biset.size(),
      EdgeKind::Bulk(r) if r == area.c_region => cg.order(),
      EdgeKind::Bulk(_) => dg.order(),
    };
    if x >= bound {
      return Err(Error::LabelOutOfRange(format!("label {x} on boundary edge {e}")));
    }
    label.insert(e, x);
  }
  let mut lines = Vec::new();
  let mut line_of = HashMap::new();
  for e in c.boundary_edges() {
    if let EdgeKind::Bulk(r) = c.edges()[e].kind {
      let layer = if r == area.c_region { Layer::C } else { Layer::D };
      line_of.insert(e, lines.len());
      lines.push(Line { layer, label: label[&e] });
    }
  }
  let mut vertices = Vec::new();
  // Boundary defect triangles: (prev defect edge, next defect edge, attachment).
  let mut corner_data = Vec::new();
  for f in c.boundary_triangles() {
    let tri = c.triangles()[f];
    let (t, slot) = c.triangle_tets(f)[0];
    let s = c.induced_sign(t, slot);
    let cyc: [usize; 3] = if s > 0 { [0, 1, 2] } else { [2, 1, 0] };
    let end = |k: usize| if tri.signs[k] * s > 0 { End::Tail } else { End::Head };
    let bulk: Vec<usize> = cyc.iter().copied().filter(|&k| line_of.contains_key(&tri.edges[k])).collect();
    match bulk.len() {
      3 => {
        let ends: Vec<Attachment> = cyc.iter().map(|&k| (line_of[&tri.edges[k]], end(k))).collect();
        let layer = lines[ends[0].0].layer;
        vertices.push(if layer == Layer::C { ends } else { ends.into_iter().rev().collect() });
      }
      1 => {
        let p = cyc.iter().position(|&k| k == bulk[0]).unwrap();
        let (after, before) = (tri.edges[cyc[(p + 1) % 3]], tri.edges[cyc[(p + 2) % 3]]);
        let line = line_of[&tri.edges[bulk[0]]];
        let (prev, next) = if lines[line].layer == Layer::C { (after, before) } else { (before, after) };
        corner_data.push((prev, next, (line, end(bulk[0]))));
      }
      _ => return Err(not_disc(format!("boundary triangle {f} has an unexpected edge pattern"))),
    }
  }
  if corner_data.is_empty() {
    return Err(not_disc("the defect surface has no boundary".into()));
  }
  let by_prev: HashMap<usize, usize> = corner_data.iter().enumerate().map(|(i, d)| (d.0, i)).collect();
  if by_prev.len() != corner_data.len() {
    return Err(not_disc("the boundary of the defect surface is not a simple cycle".into()));
  }
  let mut segments = Vec::new();
  let mut corners = Vec::new();
  let mut k = 0;
  loop {
    let (prev, next, att) = corner_data[k];
    segments.push(label[&prev]);
    corners.push(vec![att]);
    k = *by_prev.get(&next).ok_or_else(|| not_disc("the boundary of the defect surface is not closed".into()))?;
    if k == 0 {
      break;
    }
    if corners.len() > corner_data.len() {
      return Err(not_disc("the boundary of the defect surface is not a simple cycle".into()));
    }
  }
  if corners.len() != corner_data.len() {
    return Err(not_disc("the boundary of the defect surface has several components".into()));
  }
  PolygonDiagram::new(biset, segments, corners, lines, vertices)
}

/// A trivalent caterpillar tree joining `ends` (counterclockwise), whose inner lines are
/// labeled so that every vertex but the last holds; `elements[k]` is what end `k`
/// contributes at the tree.
fn caterpillar(
  group: &FiniteGroup,
  layer: Layer,
  ends: &[Attachment],
  elements: &[usize],
  lines: &mut Vec<Line>,
  vertices: &mut Vec<Vec<Attachment>>,
) {
  let n = ends.len();
  if n < 3 {
    vertices.push(ends.to_vec());
    return;
  }
  let compose = |acc: usize, g: usize| match layer {
    Layer::C => group.mul(g, acc),
    Layer::D => group.mul(acc, g),
  };
  let mut acc = compose(elements[0], elements[1]);
  let mut inner = lines.len();
  lines.push(Line { layer, label: acc });
  vertices.push(vec![ends[0], ends[1], (inner, End::Head)]);
  for j in 2..n - 2 {
    acc = compose(acc, elements[j]);
    let next = lines.len();
    lines.push(Line { layer, label: acc });
    vertices.push(vec![(inner, End::Tail), ends[j], (next, End::Head)]);
    inner = next;
  }
  vertices.push(vec![(inner, End::Tail), ends[n - 2], ends[n - 1]]);
}

/// The diagram of the cylinder over a closed genus-`g` surface cut open to a
/// `4g`-gon, with every segment labeled `m`. Reading the sides clockwise spells
/// `a₁ b₁ a₁⁻¹ b₁⁻¹ ⋯`; side `aᵢ` carries a `C` line labeled `a[i].0` and a `D` line
/// labeled `a[i].1`, and likewise for `bᵢ`. Trivalent trees in each layer join the lines.
/// It evaluates to `1` exactly when `[a₁,b₁]⋯[a_g,b_g] = 1` in `G`, the primed relation
/// holds in `G′ᵒᵖ`, and every pair `(aᵢ, a′ᵢ)`, `(bᵢ, b′ᵢ)` fixes `m`.
pub fn surface_polygon(biset: &BiSet, a: &[(usize, usize)], b: &[(usize, usize)], m: usize) -> Result<PolygonDiagram> {
  let g = a.len();
  if g == 0 || b.len() != g {
    return Err(malformed("surface polygon needs g ≥ 1 pairs of generators for both a and b"));
  }
  // The word a₁ b₁ a₁⁻¹ b₁⁻¹ ⋯ as (label pair, positive).
  let mut word = Vec::with_capacity(4 * g);
  for i in 0..g {
    word.extend([(a[i], true), (b[i], true), (a[i], false), (b[i], false)]);
  }
  word.reverse();
  let (gc, gd) = (biset.left_group(), biset.right_group());
  let mut lines = Vec::new();
  let mut corners = Vec::new();
  let (mut c_ends, mut d_ends, mut c_elems, mut d_elems) = (vec![], vec![], vec![], vec![]);
  for &((x, y), positive) in &word {
    let end = if positive { End::Head } else { End::Tail };
    let (lc, ld) = (lines.len(), lines.len() + 1);
    lines.push(Line { layer: Layer::C, label: x });
    lines.push(Line { layer: Layer::D, label: y });
    corners.push(vec![(lc, end), (ld, end)]);
    c_ends.push((lc, end.flip()));
    d_ends.push((ld, end.flip()));
    c_elems.push(if positive { x } else { gc.inv(x) });
    d_elems.push(if positive { y } else { gd.inv(y) });
  }
  let mut vertices = Vec::new();
  caterpillar(gc, Layer::C, &c_ends, &c_elems, &mut lines, &mut vertices);
  caterpillar(gd, Layer::D, &d_ends, &d_elems, &mut lines, &mut vertices);
  PolygonDiagram::new(biset.clone(), vec![m; 4 * g], corners, lines, vertices)
}

fn attachment_token(&(l, e): &Attachment) -> String { format!("{l}{}", if e == End::Head { 'h' } else { 't' }) }

/// The text format read by [`parse_diagram`]:
///
/// ```text
/// segments 0 1 0 1
/// line C 1
/// line D 0
/// corner 0t
/// corner 1t
/// corner 0h
/// corner 1h
/// vertex 2h 3t 4t
/// ```
///
/// Lines and corners are numbered in order of appearance; an attachment `<line>h` or
/// `<line>t` names the head or tail of a line.
impl fmt::Display for PolygonDiagram {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let join = |ends: &[Attachment]| ends.iter().map(|a| format!(" {}", attachment_token(a))).collect::<String>();
    writeln!(f, "segments{}", self.segments.iter().map(|s| format!(" {s}")).collect::<String>())?;
    for line in &self.lines {
      writeln!(f, "line {:?} {}", line.layer, line.label)?;
    }
    for c in &self.corners {
      writeln!(f, "corner{}", join(c))?;
    }
    for v in &self.vertices {
      writeln!(f, "vertex{}", join(v))?;
    }
    Ok(())
  }
}

/// Parses the text format of [`PolygonDiagram`]'s `Display` over `biset`; `#` starts a
/// comment.
pub fn parse_diagram(biset: &BiSet, text: &str) -> Result<PolygonDiagram> {
  let mut segments = None;
  let (mut lines, mut corners, mut vertices) = (Vec::new(), Vec::new(), Vec::new());
  for (lineno, raw) in text.lines().enumerate() {
    let err = |message: String| Error::SyntaxError { line: lineno + 1, message };
    let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
    let Some((&key, args)) = toks.split_first() else { continue };
    let number = |t: &str| t.parse::<usize>().map_err(|_| err(format!("expected a non-negative integer, found '{t}'")));
    let attachment = |t: &str| -> Result<Attachment> {
      let (id, end) = t.split_at(t.len().saturating_sub(1));
      let end = match end {
        "h" => End::Head,
        "t" => End::Tail,
        _ => return Err(err(format!("attachment '{t}' must end in 'h' or 't'"))),
      };
      Ok((number(id)?, end))
    };
    match key {
      "segments" => {
        if segments.is_some() {
          return Err(err("duplicate 'segments' line".into()));
        }
        segments = Some(args.iter().map(|t| number(t)).collect::<Result<Vec<_>>>()?);
      }
      "line" => {
        let [layer, label] = args else { return Err(err("expected 'line <C|D> <label>'".into())) };
        let layer = match *layer {
          "C" => Layer::C,
          "D" => Layer::D,
          other => return Err(err(format!("unknown layer '{other}'"))),
        };
        lines.push(Line { layer, label: number(label)? });
      }
      "corner" => corners.push(args.iter().map(|t| attachment(t)).collect::<Result<Vec<_>>>()?),
      "vertex" => vertices.push(args.iter().map(|t| attachment(t)).collect::<Result<Vec<_>>>()?),
      other => return Err(err(format!("unknown keyword '{other}'"))),
    }
  }
  PolygonDiagram::new(biset.clone(), segments.unwrap_or_default(), corners, lines, vertices)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::algebra::FiniteGroup;
  use crate::builders::{defect_tet, fan_disc, prism_cylinder, wheel_disc, Labels};
  use crate::complex::ComplexBuilder;
  use crate::oracle::admissible_boundaries;
  use crate::statesum::state_sum;

  fn g(desc: &str) -> FiniteGroup { FiniteGroup::from_descriptor(desc).unwrap() }

  fn bisets() -> Vec<BiSet> {
    vec![
      BiSet::regular(g("Z/2")),
      BiSet::trivial(g("S3"), g("Z/2")),
      BiSet::regular(g("S3")),
      BiSet::left_cosets(g("S3"), &[1]).unwrap(),
    ]
  }

  fn two_type_b() -> DefectComplex {
    let mut b = ComplexBuilder::new();
    let (c, d) = (b.add_region("G"), b.add_region("Gp"));
    b.add_area("X", c, d);
    let v = [b.add_vertex(d), b.add_vertex(d), b.add_vertex(c), b.add_vertex(c), b.add_vertex(c)];
    b.add_tet([v[0], v[1], v[2], v[3]], 1).unwrap();
    b.add_tet([v[0], v[1], v[2], v[4]], -1).unwrap();
    b.build_oriented().unwrap()
  }

  fn fine_discs() -> Vec<(&'static str, DefectComplex)> {
    let l = Labels::default();
    vec![
      ("type a (1+3)", defect_tet(1, &l).unwrap()),
      ("type b", defect_tet(2, &l).unwrap()),
      ("type a (3+1)", defect_tet(3, &l).unwrap()),
      ("two type b", two_type_b()),
      ("prism", prism_cylinder(&fan_disc(1).unwrap(), &l).unwrap().0),
      ("two prisms", prism_cylinder(&fan_disc(2).unwrap(), &l).unwrap().0),
    ]
  }

  #[test]
  fn projection_matches_rescaled_state_sum() {
    let mut checked = 0;
    for x in bisets() {
      let theory = Labels::default().theory(x.clone());
      for (name, c) in fine_discs() {
        let bs = match admissible_boundaries(&theory, &c, 200_000) {
          Ok(bs) => bs,
          Err(Error::TooLarge { .. }) => continue,
          Err(e) => panic!("{name}: {e}"),
        };
        checked += 1;
        assert!(!bs.is_empty(), "{name}");
        for b in bs.iter().step_by(1 + bs.len() / 300) {
          let p = project_fine_disc(&theory, &c, b).unwrap();
          let z = state_sum(&theory, &c, b).unwrap().rescaled;
          assert_eq!(evaluate(&p), z, "{name}\n{p}");
        }
      }
    }
    assert!(checked >= 20, "only {checked} combinations were small enough");
  }

  #[test]
  fn projection_of_wheel_prism_with_interior_defect_edge() {
    let c = prism_cylinder(&wheel_disc(3).unwrap(), &Labels::default()).unwrap().0;
    let theory = Labels::default().theory(BiSet::regular(g("Z/2")));
    let bs = admissible_boundaries(&theory, &c, 200_000).unwrap();
    for b in bs.iter().step_by(1 + bs.len() / 200) {
      let p = project_fine_disc(&theory, &c, b).unwrap();
      assert_eq!(evaluate(&p), state_sum(&theory, &c, b).unwrap().rescaled);
    }
  }

  #[test]
  fn projection_shapes() {
    let x = BiSet::regular(g("Z/2"));
    let theory = Labels::default().theory(x);
    let shape = |c: &DefectComplex| {
      let b = admissible_boundaries(&theory, c, 10).unwrap().remove(0);
      let p = project_fine_disc(&theory, c, &b).unwrap();
      (p.num_corners(), p.vertices().iter().map(Vec::len).collect::<Vec<_>>())
    };
    // Type a: a triangle with one trivalent vertex on the three-vertex side.
    assert_eq!(shape(&defect_tet(1, &Labels::default()).unwrap()), (3, vec![3]));
    assert_eq!(shape(&defect_tet(3, &Labels::default()).unwrap()), (3, vec![3]));
    // Type b: a square crossed by one line of each layer.
    assert_eq!(shape(&defect_tet(2, &Labels::default()).unwrap()), (4, vec![]));
  }

  #[test]
  fn projection_rejects_non_discs() {
    let l = Labels::default();
    let theory = l.theory(BiSet::regular(g("Z/2")));
    let (torus, layout) = prism_cylinder(&crate::builders::surface_triangulation(1).unwrap(), &l).unwrap();
    let b = layout.boundary(&[0, 0, 0], &[0, 0, 0]);
    assert!(matches!(project_fine_disc(&theory, &torus, &b), Err(Error::NotADiscNeighbourhood(_))));
    let plain = crate::builders::s3_five_tets();
    let t = Theory::new().with_fusion("G", crate::backend::FusionBackend::untwisted(g("Z/2")));
    assert!(matches!(project_fine_disc(&t, &plain, &BoundaryData::empty()), Err(Error::NotADiscNeighbourhood(_))));
  }

  fn square(x: &BiSet) -> PolygonDiagram {
    // A square crossed by a C line from corner 0 to corner 2 and a D line from corner 1
    // to corner 3.
    let lines = vec![Line { layer: Layer::C, label: 1 }, Line { layer: Layer::D, label: 0 }];
    let corners = vec![vec![(0, End::Tail)], vec![(1, End::Tail)], vec![(0, End::Head)], vec![(1, End::Head)]];
    PolygonDiagram::new(x.clone(), vec![0; 4], corners, lines, vec![]).unwrap()
  }

  #[test]
  fn evaluation_is_rotation_invariant() {
    let x = BiSet::regular(g("S3"));
    let d = square(&x);
    for labels in [[0, 1, 1, 0], [0, 1, 1, 1], [2, 3, 3, 2]] {
      let mut d = d.clone();
      for (k, &m) in labels.iter().enumerate() {
        d = d.with_segment(k, m).unwrap();
      }
      let v = evaluate(&d);
      for r in 0..4 {
        assert_eq!(evaluate(&d.rotated(r)), v);
      }
    }
  }

  #[test]
  fn text_round_trip() {
    let x = BiSet::regular(g("S3"));
    let d = surface_polygon(&x, &[(1, 2)], &[(3, 4)], 0).unwrap();
    assert_eq!(parse_diagram(&x, &d.to_string()).unwrap(), d);
    assert!(matches!(parse_diagram(&x, "segments 0\ncorner 0x"), Err(Error::SyntaxError { line: 2, .. })));
    assert!(matches!(parse_diagram(&x, "bogus"), Err(Error::SyntaxError { line: 1, .. })));
  }

  #[test]
  fn empty_diagram_is_one() {
    let x = BiSet::regular(g("Z/3"));
    let d = PolygonDiagram::new(x.clone(), vec![2], vec![vec![]], vec![], vec![]).unwrap();
    assert_eq!(evaluate(&d), ScalarValue::one());
    let closed = PolygonDiagram::closed(x, vec![], vec![]).unwrap();
    assert_eq!(evaluate(&closed), ScalarValue::one());
  }

  #[test]
  fn malformed_diagrams() {
    let x = BiSet::regular(g("Z/2"));
    let line = Line { layer: Layer::C, label: 1 };
    // A line with two heads.
    let bad = PolygonDiagram::new(x.clone(), vec![0, 0], vec![vec![(0, End::Head)], vec![(0, End::Head)]], vec![line], vec![]);
    assert!(matches!(bad, Err(Error::MalformedDiagram(_))));
    // Segment and corner counts differ.
    assert!(PolygonDiagram::new(x.clone(), vec![0], vec![], vec![], vec![]).is_err());
    // Crossing lines of one layer: corners 0→2 and 1→3 both in C.
    let lines = vec![line, line];
    let corners = vec![vec![(0, End::Tail)], vec![(1, End::Tail)], vec![(0, End::Head)], vec![(1, End::Head)]];
    let crossing = PolygonDiagram::new(x.clone(), vec![0; 4], corners, lines, vec![]);
    assert!(matches!(crossing, Err(Error::MalformedDiagram(_))), "{crossing:?}");
    // Mixed-layer vertex.
    let lines = vec![line, Line { layer: Layer::D, label: 0 }];
    let v = vec![vec![(0, End::Head), (0, End::Tail), (1, End::Head), (1, End::Tail)]];
    assert!(PolygonDiagram::closed(x, lines, v).is_err());
  }

  #[test]
  fn surface_polygon_relations() {
    let s3 = g("S3");
    let x = BiSet::trivial(s3.clone(), g("Z/2"));
    // Commuting pairs vs a non-commuting pair in S3 (elements 1 and 3 do not commute).
    let commute = (0..6).flat_map(|a| (0..6).map(move |b| (a, b))).find(|&(a, b)| a != 0 && b != 0 && a != b && s3.mul(a, b) == s3.mul(b, a));
    let noncommute = (0..6).flat_map(|a| (0..6).map(move |b| (a, b))).find(|&(a, b)| s3.mul(a, b) != s3.mul(b, a)).unwrap();
    if let Some((a, b)) = commute {
      assert_eq!(evaluate(&surface_polygon(&x, &[(a, 1)], &[(b, 0)], 0).unwrap()), ScalarValue::one());
    }
    let (a, b) = noncommute;
    assert_eq!(evaluate(&surface_polygon(&x, &[(a, 1)], &[(b, 1)], 0).unwrap()), ScalarValue::zero());
  }

  #[test]
  fn surface_polygon_counts_fixed_points() {
    // Σ_m ev(P) = #{m fixed by all pairs} when the relations hold.
    let z4 = g("Z/4");
    let x = BiSet::regular(z4.clone());
    for a in 0..4 {
      for b in 0..4 {
        let (pa, pb) = ((a, z4.inv(a)), (b, z4.inv(b)));
        let sum: usize = (0..4).filter(|&m| surface_polygon(&x, &[pa], &[pb], m).unwrap().holds()).count();
        assert_eq!(sum, x.fixed_points(&[pa, pb]).len());
      }
    }
    // Genus 2 over S3 with the regular biset: only trivial-in-stabilizer data survives.
    let s3 = g("S3");
    let x = BiSet::regular(s3.clone());
    let one = surface_polygon(&x, &[(0, 0), (0, 0)], &[(0, 0), (0, 0)], 3).unwrap();
    assert!(one.holds());
    let stab = surface_polygon(&x, &[(1, s3.inv(1)), (0, 0)], &[(0, 0), (0, 0)], 3).unwrap();
    assert_eq!(stab.holds(), x.fixed_points(&[(1, s3.inv(1))]).contains(&3));
  }

  fn all_labelings(d: &PolygonDiagram, k: usize) -> Vec<PolygonDiagram> {
    (0..d.biset().size()).map(|x| d.with_segment(k, x).unwrap()).collect()
  }

  #[test]
  fn fold_and_two_gon_identities() {
    for x in bisets() {
      let (gc, gd) = (x.left_group().clone(), x.right_group().clone());
      for c in 0..gc.order() {
        for dd in 0..gd.order() {
          // A 2-gon crossed by a C line and a D line, each from corner 0 to corner 1.
          let lines = vec![Line { layer: Layer::C, label: c }, Line { layer: Layer::D, label: dd }];
          let corners = vec![vec![(0, End::Tail), (1, End::Tail)], vec![(1, End::Head), (0, End::Head)]];
          let two = PolygonDiagram::new(x.clone(), vec![0, 0], corners, lines, vec![]).unwrap();
          let mut lhs = 0;
          for m in 0..x.size() {
            for n in 0..x.size() {
              lhs += two.with_segment(0, m).unwrap().with_segment(1, n).unwrap().holds() as usize;
            }
          }
          let closed = glue_2gon(&two).unwrap();
          assert!(closed.is_closed());
          assert_eq!(lhs, x.size() * closed.holds() as usize);
          // Folding a triangle: corners 0 and 1 mirror each other around segment 1.
          let lines = vec![Line { layer: Layer::C, label: c }, Line { layer: Layer::D, label: dd }];
          let corners = vec![vec![(0, End::Tail), (1, End::Tail)], vec![(1, End::Head), (0, End::Head)], vec![]];
          for m in 0..x.size() {
            let tri = PolygonDiagram::new(x.clone(), vec![m, 0, m], corners.clone(), lines.clone(), vec![]).unwrap();
            let lhs = all_labelings(&tri, 1).iter().filter(|d| d.holds()).count();
            let folded = fold_vertex(&tri, 0).unwrap();
            assert_eq!(folded.num_corners(), 1);
            assert_eq!(lhs, folded.holds() as usize);
          }
        }
      }
    }
  }

  #[test]
  fn gluing_sides_identity() {
    for x in bisets() {
      let theory = Labels::default().theory(x.clone());
      let c = defect_tet(2, &Labels::default()).unwrap();
      let bs = admissible_boundaries(&theory, &c, 100_000).unwrap();
      let diagrams: Vec<PolygonDiagram> = bs.iter().map(|b| project_fine_disc(&theory, &c, b).unwrap()).collect();
      // Glue each square to the mirror image of itself along every corner.
      for d in diagrams.iter().take(12) {
        let mirror = mirror_diagram(d);
        for k in 0..d.num_corners() {
          let k2 = d.num_corners() - 1 - k;
          let glued = glue_sides(d, k, &mirror, k2).unwrap();
          assert_eq!(glued.holds(), d.holds() && mirror.holds());
        }
      }
    }
  }

  /// The reflected diagram: boundary reversed, every line reversed.
  fn mirror_diagram(d: &PolygonDiagram) -> PolygonDiagram {
    let n = d.num_corners();
    // New segment j is old segment n − j; new corner j is old corner n − 1 − j.
    let segments: Vec<usize> = (0..n).map(|j| d.segments()[(n - j) % n]).collect();
    let flip = |v: &Vec<Attachment>| v.iter().rev().map(|&(l, e)| (l, e.flip())).collect::<Vec<_>>();
    let corners: Vec<Vec<Attachment>> = (0..n).map(|j| flip(&d.corners()[n - 1 - j])).collect();
    let vertices: Vec<Vec<Attachment>> = d.vertices().iter().map(flip).collect();
    PolygonDiagram::new(d.biset().clone(), segments, corners, d.lines().to_vec(), vertices).unwrap()
  }

  #[test]
  fn insert_bulk_identity() {
    let x = BiSet::regular(g("S3"));
    let d = square(&x).with_segment(1, 0).unwrap();
    // A trivially labeled loop.
    let e = x.left_group().identity();
    let loop_ = PolygonDiagram::closed(x.clone(), vec![Line { layer: Layer::C, label: e }], vec![vec![(0, End::Head), (0, End::Tail)]]).unwrap();
    for seg in 0..6 {
      let d = d.with_segment(2, seg).unwrap();
      assert_eq!(evaluate(&insert_bulk(&d, &loop_, None).unwrap()), evaluate(&d));
    }
    // Splicing a labeled theta graph into the C line.
    let gc = x.left_group();
    let theta = theta_graph(&x, gc.mul(gc.inv(2), 1), 2);
    assert!(theta.holds());
    for seg in 0..6 {
      let d = d.with_segment(2, seg).unwrap();
      let spliced = insert_bulk(&d, &theta, Some((0, 0))).unwrap();
      assert_eq!(spliced.holds(), d.holds() && theta.holds());
    }
    assert!(matches!(insert_bulk(&d, &d, None), Err(Error::PatternMismatch(_))));
  }

  /// Two vertices joined by lines labeled `a`, `b` and `b·a` (all from the left vertex),
  /// which satisfy the C constraint exactly when the composite matches.
  fn theta_graph(x: &BiSet, a: usize, b: usize) -> PolygonDiagram {
    let gc = x.left_group();
    let ba = gc.mul(b, a);
    let lines = vec![Line { layer: Layer::C, label: ba }, Line { layer: Layer::C, label: b }, Line { layer: Layer::C, label: a }];
    // Vertex 0: a out, b in? Composite b·a realised as a → (b) → ba around the vertex.
    let v0 = vec![(2, End::Tail), (1, End::Tail), (0, End::Head)];
    let v1 = vec![(0, End::Tail), (1, End::Head), (2, End::Head)];
    PolygonDiagram::closed(x.clone(), lines, vec![v0, v1]).unwrap()
  }
}
