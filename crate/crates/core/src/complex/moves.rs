//! Bistellar moves, stellar subdivisions and shellings.
//!
//! Every move is a *ball surgery*: a set of tetrahedra (possibly empty) is removed and
//! replaced by new tetrahedra spanned by the same "local" vertices, with the ball's
//! boundary faces reused. Local vertices are corner classes of the removed tetrahedra
//! glued across the removed faces, so the engine works in Δ-complexes where several
//! locals may be the same global vertex. New edge kinds follow from the sides of their
//! endpoints, bulk edge directions are chosen so every new triangle stays acyclic, and
//! orientations are inherited from the reused faces.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::validate::{validate, UnionFind, ViolationKind};
use super::{Colour, DefectComplex, Edge, EdgeKind, Tet, TetClass, Triangle, TET_EDGES, TET_FACES};
use crate::error::{Error, Result};

/// The kind of a local move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
  /// Replace two tetrahedra sharing an internal triangle by three around a new edge.
  TwoThree,
  /// Replace three tetrahedra around an internal edge of degree 3 by two.
  ThreeTwo,
  /// Cone a tetrahedron from a new interior vertex.
  OneFour,
  /// Remove an internal vertex of degree 4.
  FourOne,
  /// Subdivide an internal edge at a new vertex.
  StellarEdge,
  /// Subdivide an internal triangle at a new vertex.
  StellarTriangle,
  /// Remove a tetrahedron meeting the boundary in one, two or three faces.
  Shelling,
  /// Attach a tetrahedron along one, two or three boundary faces.
  InverseShelling,
}

/// Which side of the defect surface receives a new vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placement {
  /// The unique side available in the subdivided cell; an error if there are two.
  Auto,
  /// The `C`-side (heads of defect edges).
  C,
  /// The `D`-side (tails of defect edges).
  D,
}

/// A move together with the cells it acts on.
///
/// Cells: 2-3 and stellar-triangle take one triangle; 3-2 and stellar-edge one edge;
/// 1-4 and shelling one tetrahedron; 4-1 one vertex; inverse shelling one, two or three
/// boundary triangles.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MoveDescriptor {
  /// Move kind.
  pub kind:      MoveKind,
  /// Cell ids the move acts on.
  pub cells:     Vec<usize>,
  /// Side of the new vertex for subdivision moves near defects.
  pub placement: Placement,
}

impl MoveDescriptor {
  /// A descriptor with automatic placement.
  pub fn new(kind: MoveKind, cells: Vec<usize>) -> Self { Self { kind, cells, placement: Placement::Auto } }

  /// A descriptor with explicit placement.
  pub fn placed(kind: MoveKind, cells: Vec<usize>, placement: Placement) -> Self { Self { kind, cells, placement } }
}

/// Result of a move with id maps from the old complex to the new one.
#[derive(Clone, Debug)]
pub struct MoveOutcome {
  /// The new complex.
  pub complex:    DefectComplex,
  /// Old vertex id → new vertex id (`None` if removed).
  pub vertex_map: Vec<Option<usize>>,
  /// Old edge id → new edge id.
  pub edge_map:   Vec<Option<usize>>,
  /// Old triangle id → new triangle id.
  pub tri_map:    Vec<Option<usize>>,
  /// Old tet id → new tet id.
  pub tet_map:    Vec<Option<usize>>,
  /// Id of the vertex created by the move, if any.
  pub new_vertex: Option<usize>,
  /// Ids of the tetrahedra created by the move.
  pub new_tets:   Vec<usize>,
}

/// Applies a move, returning the new complex.
pub fn apply_move(c: &DefectComplex, m: &MoveDescriptor) -> Result<DefectComplex> { Ok(apply_move_tracked(c, m)?.complex) }

fn mismatch(msg: impl Into<String>) -> Error { Error::PatternMismatch(msg.into()) }

fn one_cell(m: &MoveDescriptor, bound: usize, what: &str) -> Result<usize> {
  match *m.cells.as_slice() {
    [x] if x < bound => Ok(x),
    [x] => Err(mismatch(format!("{what} {x} does not exist"))),
    _ => Err(mismatch(format!("{:?} takes exactly one {what}", m.kind))),
  }
}

/// Applies a move and reports how ids changed.
pub fn apply_move_tracked(c: &DefectComplex, m: &MoveDescriptor) -> Result<MoveOutcome> {
  match m.kind {
    MoveKind::TwoThree => two_three(c, one_cell(m, c.triangles.len(), "triangle")?),
    MoveKind::ThreeTwo => three_two(c, one_cell(m, c.edges.len(), "edge")?),
    MoveKind::OneFour => one_four(c, one_cell(m, c.tets.len(), "tet")?, m.placement),
    MoveKind::FourOne => four_one(c, one_cell(m, c.vertices.len(), "vertex")?),
    MoveKind::StellarEdge => stellar_edge(c, one_cell(m, c.edges.len(), "edge")?, m.placement),
    MoveKind::StellarTriangle => stellar_triangle(c, one_cell(m, c.triangles.len(), "triangle")?, m.placement),
    MoveKind::Shelling => shelling(c, one_cell(m, c.tets.len(), "tet")?),
    MoveKind::InverseShelling => inverse_shelling(c, &m.cells, m.placement),
  }
}

/// Occurrences `(tet, local edge index)` of edge `e` in tetrahedron frames.
fn edge_occurrences(c: &DefectComplex, e: usize) -> Vec<(usize, usize)> {
  let mut out = Vec::new();
  for t in 0..c.tets.len() {
    let fr = c.frame_unchecked(t);
    for k in 0..6 {
      if fr.edges[k] == e {
        out.push((t, k));
      }
    }
  }
  out
}

/// Corners `(tet, local vertex)` at global vertex `v`.
fn vertex_corners(c: &DefectComplex, v: usize) -> Vec<(usize, usize)> {
  let mut out = Vec::new();
  for t in 0..c.tets.len() {
    let fr = c.frame_unchecked(t);
    for i in 0..4 {
      if fr.verts[i] == v {
        out.push((t, i));
      }
    }
  }
  out
}

/// Ball surgery state.
struct Surgery<'a> {
  c:            &'a DefectComplex,
  removed:      Vec<usize>,
  /// Global vertex of each local (`None` for the new vertex).
  local_vertex: Vec<Option<usize>>,
  /// Directed old edges between locals: sorted pair → (edge id, tail local).
  edge_of:      HashMap<(usize, usize), (usize, usize)>,
  /// Reused faces: sorted local triple → (triangle id, required induced sign).
  face_of:      HashMap<[usize; 3], (usize, i8)>,
  colours:      Vec<Colour>,
  area:         Option<usize>,
  new_region:   Option<usize>,
  new_tets:     Vec<[usize; 4]>,
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
  t.sort_unstable();
  t
}

fn pair(a: usize, b: usize) -> (usize, usize) { (a.min(b), a.max(b)) }

impl<'a> Surgery<'a> {
  /// A ball made of the given tetrahedra glued across `removed_faces`.
  fn from_tets(c: &'a DefectComplex, tets: &[usize], removed_faces: &BTreeSet<usize>) -> Result<(Self, Vec<[usize; 4]>)> {
    let k = tets.len();
    let mut uf = UnionFind::new(k * 4);
    let pos = |t: usize| tets.iter().position(|&x| x == t);
    for &f in removed_faces {
      let inc = c.triangle_tets(f);
      if inc.len() != 2 {
        return Err(mismatch(format!("triangle {f} is not internal")));
      }
      let (Some(a), Some(b)) = (pos(inc[0].0), pos(inc[1].0)) else {
        return Err(mismatch(format!("triangle {f} leaves the move's tetrahedra")));
      };
      let (ca, cb) = (TET_FACES[inc[0].1], TET_FACES[inc[1].1]);
      for j in 0..3 {
        uf.union(a * 4 + ca[j], b * 4 + cb[j]);
      }
    }
    let mut local_index = BTreeMap::new();
    let mut corner_local = vec![[0usize; 4]; k];
    let mut local_vertex = Vec::new();
    for (ti, &t) in tets.iter().enumerate() {
      let fr = c.frame_unchecked(t);
      for i in 0..4 {
        let root = uf.find(ti * 4 + i);
        let l = *local_index.entry(root).or_insert_with(|| {
          local_vertex.push(Some(fr.verts[i]));
          local_vertex.len() - 1
        });
        if local_vertex[l] != Some(fr.verts[i]) {
          return Err(mismatch("corner identification joins different vertices"));
        }
        corner_local[ti][i] = l;
      }
    }
    let mut s = Surgery {
      c,
      removed: tets.to_vec(),
      local_vertex,
      edge_of: HashMap::new(),
      face_of: HashMap::new(),
      colours: Vec::new(),
      area: None,
      new_region: None,
      new_tets: Vec::new(),
    };
    for (ti, &t) in tets.iter().enumerate() {
      let fr = c.frame_unchecked(t);
      let l = corner_local[ti];
      if (0..4).any(|i| (i + 1..4).any(|j| l[i] == l[j])) {
        return Err(mismatch(format!("tet {t} is degenerate inside the move")));
      }
      for (kk, &(i, j)) in TET_EDGES.iter().enumerate() {
        s.add_edge(l[i], l[j], fr.edges[kk])?;
      }
      for slot in 0..4 {
        let f = c.tets[t].faces[slot];
        if removed_faces.contains(&f) {
          continue;
        }
        let cs = TET_FACES[slot];
        s.add_face([l[cs[0]], l[cs[1]], l[cs[2]]], f, c.induced_sign(t, slot))?;
      }
    }
    Ok((s, corner_local))
  }

  fn add_edge(&mut self, tail: usize, head: usize, e: usize) -> Result<()> {
    match self.edge_of.insert(pair(tail, head), (e, tail)) {
      Some((old, old_tail)) if old != e || old_tail != tail => Err(mismatch("two edges join the same pair of corners")),
      _ => Ok(()),
    }
  }

  fn add_face(&mut self, corners: [usize; 3], f: usize, sign: i8) -> Result<()> {
    match self.face_of.insert(sorted3(corners), (f, sign)) {
      Some((old, old_sign)) if old != f || old_sign != sign => Err(mismatch("two faces span the same corners")),
      _ => Ok(()),
    }
  }

  /// Computes local colours and the ball's area from its old edges.
  fn colour(&mut self) -> Result<()> {
    let n = self.local_vertex.len();
    let mut colours = vec![Colour::N; n];
    let mut area = None;
    let mut changed = false;
    for (&(a, b), &(e, tail)) in &self.edge_of {
      if let EdgeKind::Defect(ar) = self.c.edges[e].kind {
        if area.is_some_and(|x| x != ar) {
          return Err(mismatch("move spans several defect areas"));
        }
        area = Some(ar);
        let head = if tail == a { b } else { a };
        for (v, col) in [(tail, Colour::D), (head, Colour::C)] {
          if colours[v] == Colour::N {
            colours[v] = col;
            changed = true;
          } else if colours[v] != col {
            return Err(mismatch("corner is on both sides of the defect surface"));
          }
        }
      }
    }
    while changed {
      changed = false;
      for (&(a, b), &(e, _)) in &self.edge_of {
        if let EdgeKind::Bulk(_) = self.c.edges[e].kind {
          for (x, y) in [(a, b), (b, a)] {
            if colours[x] != Colour::N && colours[y] == Colour::N {
              colours[y] = colours[x];
              changed = true;
            } else if colours[x] != Colour::N && colours[y] != colours[x] {
              return Err(mismatch("bulk edge joins both sides of the defect surface"));
            }
          }
        }
      }
    }
    self.colours = colours;
    self.area = area;
    Ok(())
  }

  /// Adds the new vertex on the chosen side; its colour must occur among `cell_locals`.
  fn add_new_vertex(&mut self, cell_locals: &[usize], placement: Placement) -> Result<usize> {
    let present: BTreeSet<Colour> = cell_locals.iter().map(|&l| self.colours[l]).collect();
    let colour = match placement {
      Placement::Auto => {
        if present.len() != 1 {
          return Err(mismatch("the cell meets both sides of the defect surface; a placement is required"));
        }
        *present.iter().next().expect("one colour")
      }
      Placement::C => Colour::C,
      Placement::D => Colour::D,
    };
    if !present.contains(&colour) {
      return Err(Error::WouldBreakTransversality(format!(
        "a new vertex on the {colour:?}-side of a cell without such vertices creates a new defect component"
      )));
    }
    let region = match (colour, self.area) {
      (Colour::C, Some(a)) => self.c.areas[a].c_region,
      (Colour::D, Some(a)) => self.c.areas[a].d_region,
      _ => {
        let v = self.local_vertex[cell_locals[0]].expect("old corner");
        self.c.vertices[v]
      }
    };
    self.local_vertex.push(None);
    self.colours.push(colour);
    self.new_region = Some(region);
    Ok(self.local_vertex.len() - 1)
  }

  fn region_of(&self, l: usize) -> usize {
    match self.local_vertex[l] {
      Some(v) => self.c.vertices[v],
      None => self.new_region.expect("new vertex region"),
    }
  }

  /// Kind of a new edge and its forced tail, if any.
  fn new_edge_kind(&self, a: usize, b: usize) -> Result<(EdgeKind, Option<usize>)> {
    let (ra, rb) = (self.region_of(a), self.region_of(b));
    let (ca, cb) = (self.colours[a], self.colours[b]);
    let sides_differ = matches!((ca, cb), (Colour::C, Colour::D) | (Colour::D, Colour::C));
    if ra == rb && !sides_differ {
      return Ok((EdgeKind::Bulk(ra), None));
    }
    let area = match self.area {
      Some(ar) => ar,
      None => return Err(mismatch("new edge joins two regions without a defect area")),
    };
    let ar = &self.c.areas[area];
    let tail = if sides_differ {
      if ca == Colour::D { a } else { b }
    } else if (ra, rb) == (ar.d_region, ar.c_region) {
      a
    } else if (ra, rb) == (ar.c_region, ar.d_region) {
      b
    } else {
      return Err(mismatch("new edge joins regions that are not separated by the move's area"));
    };
    Ok((EdgeKind::Defect(area), Some(tail)))
  }

  /// Builds the new complex.
  fn finish(self) -> Result<MoveOutcome> {
    let c = self.c;
    let n_loc = self.local_vertex.len();
    // Collect pairs and triples of the new tetrahedra.
    let mut pairs = BTreeSet::new();
    let mut triples = BTreeSet::new();
    for q in &self.new_tets {
      for (i, j) in TET_EDGES {
        pairs.insert(pair(q[i], q[j]));
      }
      for f in TET_FACES {
        triples.insert(sorted3([q[f[0]], q[f[1]], q[f[2]]]));
      }
    }
    // Directions: tail local of each pair.
    let mut tail_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut new_edge_kind: BTreeMap<(usize, usize), EdgeKind> = BTreeMap::new();
    let mut free = Vec::new();
    for &p in &pairs {
      if let Some(&(_, tail)) = self.edge_of.get(&p) {
        tail_of.insert(p, tail);
        continue;
      }
      let (kind, forced) = self.new_edge_kind(p.0, p.1)?;
      new_edge_kind.insert(p, kind);
      match forced {
        Some(t) => {
          tail_of.insert(p, t);
        }
        None => free.push(p),
      }
    }
    let new_triples: Vec<[usize; 3]> = triples.iter().copied().filter(|t| !self.face_of.contains_key(t)).collect();
    // Rank used to try the "natural" direction first: D before C, then local index.
    let rank = |l: usize| (matches!(self.colours[l], Colour::C), l);
    if !orient_free_edges(&free, &new_triples, &mut tail_of, &rank) {
      return Err(mismatch("no edge orientation keeps the new triangles acyclic"));
    }
    // Assemble cell lists.
    let mut vertices = c.vertices.clone();
    let mut local_global: Vec<usize> = Vec::with_capacity(n_loc);
    let mut new_vertex = None;
    for l in 0..n_loc {
      match self.local_vertex[l] {
        Some(v) => local_global.push(v),
        None => {
          vertices.push(self.new_region.expect("region"));
          new_vertex = Some(vertices.len() - 1);
          local_global.push(vertices.len() - 1);
        }
      }
    }
    let mut edges = c.edges.clone();
    let mut edge_id: HashMap<(usize, usize), usize> = self.edge_of.iter().map(|(&p, &(e, _))| (p, e)).collect();
    for (&p, &kind) in &new_edge_kind {
      let tail = tail_of[&p];
      let head = if tail == p.0 { p.1 } else { p.0 };
      edges.push(Edge { tail: local_global[tail], head: local_global[head], kind });
      edge_id.insert(p, edges.len() - 1);
    }
    let directed = |a: usize, b: usize| tail_of[&pair(a, b)] == a;
    let order3 = |t: [usize; 3]| {
      let mut v = t.to_vec();
      let snapshot = v.clone();
      v.sort_by_key(|&x| std::cmp::Reverse(snapshot.iter().filter(|&&y| y != x && directed(x, y)).count()));
      [v[0], v[1], v[2]]
    };
    let mut triangles = c.triangles.clone();
    let mut face_id: HashMap<[usize; 3], usize> = self.face_of.iter().map(|(&t, &(f, _))| (t, f)).collect();
    for &t in &new_triples {
      let [a, b, cc] = order3(t);
      triangles.push(Triangle::from_branching(edge_id[&pair(a, b)], edge_id[&pair(b, cc)], edge_id[&pair(a, cc)]));
      face_id.insert(t, triangles.len() - 1);
    }
    // New tetrahedra in branching order with faces opposite each local.
    let mut built: Vec<([usize; 4], [usize; 4])> = Vec::new();
    for q in &self.new_tets {
      let mut v = q.to_vec();
      let snapshot = v.clone();
      v.sort_by_key(|&x| std::cmp::Reverse(snapshot.iter().filter(|&&y| y != x && directed(x, y)).count()));
      let order = [v[0], v[1], v[2], v[3]];
      let mut faces = [0; 4];
      for i in 0..4 {
        let others: Vec<usize> = (0..4).filter(|&j| j != i).map(|j| order[j]).collect();
        faces[i] = face_id[&sorted3([others[0], others[1], others[2]])];
      }
      built.push((order, faces));
    }
    let orients = self.orient_new(&built)?;
    let removed: BTreeSet<usize> = self.removed.iter().copied().collect();
    let mut tets: Vec<Tet> = Vec::new();
    let mut tet_origin: Vec<Option<usize>> = Vec::new();
    for (t, tet) in c.tets.iter().enumerate() {
      if !removed.contains(&t) {
        tets.push(*tet);
        tet_origin.push(Some(t));
      }
    }
    let first_new = tets.len();
    for ((_, faces), &orient) in built.iter().zip(&orients) {
      tets.push(Tet { faces: *faces, orient, class: TetClass::Bulk });
      tet_origin.push(None);
    }
    let new_tet_range: Vec<usize> = (first_new..tets.len()).collect();
    let outcome = compact(c, vertices, edges, triangles, tets, &tet_origin, new_vertex, new_tet_range);
    let report = validate(&outcome.complex);
    if !report.is_ok() {
      let transversal = report.violations.iter().any(|v| {
        matches!(
          v.kind,
          ViolationKind::Transversality | ViolationKind::DefectTriangle | ViolationKind::RegionMismatch | ViolationKind::DefectDirection
        )
      });
      let msg = report.to_string().trim().to_string();
      return Err(if transversal { Error::WouldBreakTransversality(msg) } else { mismatch(msg) });
    }
    Ok(outcome)
  }

  /// Orientation of each new tet from the reused faces, spread through new faces.
  fn orient_new(&self, built: &[([usize; 4], [usize; 4])]) -> Result<Vec<i8>> {
    let n = built.len();
    let mut orient: Vec<Option<i8>> = vec![None; n];
    let triple_at = |b: &([usize; 4], [usize; 4]), i: usize| {
      let others: Vec<usize> = (0..4).filter(|&j| j != i).map(|j| b.0[j]).collect();
      sorted3([others[0], others[1], others[2]])
    };
    for (k, b) in built.iter().enumerate() {
      for i in 0..4 {
        if let Some(&(_, sign)) = self.face_of.get(&triple_at(b, i)) {
          let o = if i % 2 == 0 { sign } else { -sign };
          match orient[k] {
            Some(x) if x != o => return Err(mismatch("reused faces demand opposite orientations")),
            _ => orient[k] = Some(o),
          }
        }
      }
    }
    if orient.iter().all(Option::is_none) && n > 0 {
      orient[0] = Some(1);
    }
    loop {
      let mut progress = false;
      for k in 0..n {
        let Some(ok) = orient[k] else { continue };
        for i in 0..4 {
          let tk = triple_at(&built[k], i);
          if self.face_of.contains_key(&tk) {
            continue;
          }
          let sk = if i % 2 == 0 { ok } else { -ok };
          for m in 0..n {
            if m == k {
              continue;
            }
            for j in 0..4 {
              if triple_at(&built[m], j) == tk {
                let o = if j % 2 == 0 { -sk } else { sk };
                match orient[m] {
                  Some(x) if x != o => return Err(mismatch("new tetrahedra cannot be oriented consistently")),
                  Some(_) => {}
                  None => {
                    orient[m] = Some(o);
                    progress = true;
                  }
                }
              }
            }
          }
        }
      }
      if !progress {
        break;
      }
    }
    orient.into_iter().map(|o| o.ok_or_else(|| mismatch("disconnected new tetrahedra"))).collect()
  }
}

/// Backtracking assignment of directions to free pairs so that no triple is a directed
/// 3-cycle.
fn orient_free_edges(
  free: &[(usize, usize)],
  triples: &[[usize; 3]],
  tail_of: &mut HashMap<(usize, usize), usize>,
  rank: &dyn Fn(usize) -> (bool, usize),
) -> bool {
  fn cyclic(t: &[usize; 3], tail_of: &HashMap<(usize, usize), usize>) -> Option<bool> {
    let [a, b, c] = *t;
    let d = |x: usize, y: usize| tail_of.get(&pair(x, y)).map(|&tl| tl == x);
    let (ab, bc, ca) = (d(a, b)?, d(b, c)?, d(c, a)?);
    Some(ab == bc && bc == ca)
  }
  fn rec(
    i: usize,
    free: &[(usize, usize)],
    triples: &[[usize; 3]],
    tail_of: &mut HashMap<(usize, usize), usize>,
    rank: &dyn Fn(usize) -> (bool, usize),
  ) -> bool {
    if i == free.len() {
      return triples.iter().all(|t| cyclic(t, tail_of) == Some(false));
    }
    let (a, b) = free[i];
    let first = if rank(a) <= rank(b) { a } else { b };
    let second = if first == a { b } else { a };
    for tail in [first, second] {
      tail_of.insert((a, b), tail);
      let bad = triples.iter().any(|t| t.contains(&a) && t.contains(&b) && cyclic(t, tail_of) == Some(true));
      if !bad && rec(i + 1, free, triples, tail_of, rank) {
        return true;
      }
    }
    tail_of.remove(&(a, b));
    false
  }
  if triples.iter().any(|t| cyclic(t, tail_of) == Some(true)) {
    return false;
  }
  rec(0, free, triples, tail_of, rank)
}

/// Drops unreferenced cells, renumbers densely, recomputes classes, and records maps.
#[allow(clippy::too_many_arguments)]
fn compact(
  old: &DefectComplex,
  vertices: Vec<usize>,
  edges: Vec<Edge>,
  triangles: Vec<Triangle>,
  tets: Vec<Tet>,
  tet_origin: &[Option<usize>],
  new_vertex: Option<usize>,
  new_tets: Vec<usize>,
) -> MoveOutcome {
  let mut tri_used = vec![false; triangles.len()];
  for t in &tets {
    for &f in &t.faces {
      tri_used[f] = true;
    }
  }
  let mut edge_used = vec![false; edges.len()];
  for (f, tri) in triangles.iter().enumerate() {
    if tri_used[f] {
      for &e in &tri.edges {
        edge_used[e] = true;
      }
    }
  }
  let mut vert_used = vec![false; vertices.len()];
  for (e, edge) in edges.iter().enumerate() {
    if edge_used[e] {
      vert_used[edge.tail] = true;
      vert_used[edge.head] = true;
    }
  }
  let renumber = |used: &[bool]| {
    let mut next = 0;
    used
      .iter()
      .map(|&u| {
        if u {
          next += 1;
          Some(next - 1)
        } else {
          None
        }
      })
      .collect::<Vec<_>>()
  };
  let (vmap, emap, fmap) = (renumber(&vert_used), renumber(&edge_used), renumber(&tri_used));
  let new_vertices: Vec<usize> = (0..vertices.len()).filter(|&v| vert_used[v]).map(|v| vertices[v]).collect();
  let new_edges: Vec<Edge> = (0..edges.len())
    .filter(|&e| edge_used[e])
    .map(|e| {
      let x = edges[e];
      Edge { tail: vmap[x.tail].expect("used"), head: vmap[x.head].expect("used"), kind: x.kind }
    })
    .collect();
  let new_tris: Vec<Triangle> = (0..triangles.len())
    .filter(|&f| tri_used[f])
    .map(|f| {
      let t = triangles[f];
      Triangle { edges: t.edges.map(|e| emap[e].expect("used")), signs: t.signs }
    })
    .collect();
  let new_tet_list: Vec<Tet> =
    tets.iter().map(|t| Tet { faces: t.faces.map(|f| fmap[f].expect("used")), orient: t.orient, class: t.class }).collect();
  let mut complex = old.clone();
  complex.set_parts(new_vertices, new_edges, new_tris, new_tet_list);
  complex.recompute_classes();
  let mut tet_map = vec![None; old.tets.len()];
  for (new, origin) in tet_origin.iter().enumerate() {
    if let Some(o) = origin {
      tet_map[*o] = Some(new);
    }
  }
  MoveOutcome {
    complex,
    vertex_map: vmap[..old.vertices.len()].to_vec(),
    edge_map: emap[..old.edges.len()].to_vec(),
    tri_map: fmap[..old.triangles.len()].to_vec(),
    tet_map,
    new_vertex: new_vertex.and_then(|v| vmap[v]),
    new_tets,
  }
}

fn two_three(c: &DefectComplex, f: usize) -> Result<MoveOutcome> {
  let inc = c.triangle_tets(f).to_vec();
  if inc.len() != 2 {
    return Err(mismatch(format!("triangle {f} is not internal")));
  }
  if inc[0].0 == inc[1].0 {
    return Err(mismatch(format!("triangle {f} is shared by a tetrahedron with itself")));
  }
  let tets = [inc[0].0, inc[1].0];
  let (mut s, corner_local) = Surgery::from_tets(c, &tets, &BTreeSet::from([f]))?;
  if s.local_vertex.len() != 5 {
    return Err(mismatch("the two tetrahedra do not span five corners"));
  }
  s.colour()?;
  let tri = TET_FACES[inc[0].1].map(|i| corner_local[0][i]);
  let p = corner_local[0][inc[0].1];
  let q = corner_local[1][inc[1].1];
  let face_colours: BTreeSet<Colour> = tri.iter().map(|&l| s.colours[l]).collect();
  if face_colours.len() == 1 {
    let side = *face_colours.iter().next().expect("one colour");
    if side != Colour::N && s.colours[p] != side && s.colours[q] != side {
      return Err(Error::WouldBreakTransversality(
        "the new edge would cross the defect surface twice (tubing two defect discs)".into(),
      ));
    }
  }
  let [a, b, cc] = tri;
  s.new_tets = vec![[p, q, a, b], [p, q, b, cc], [p, q, a, cc]];
  s.finish()
}

fn three_two(c: &DefectComplex, e: usize) -> Result<MoveOutcome> {
  if c.is_boundary_edge(e) {
    return Err(mismatch(format!("edge {e} is on the boundary")));
  }
  let occ = edge_occurrences(c, e);
  let tets: Vec<usize> = occ.iter().map(|o| o.0).collect();
  if occ.len() != 3 || tets.iter().collect::<BTreeSet<_>>().len() != 3 {
    return Err(mismatch(format!("edge {e} does not have degree 3")));
  }
  let mut removed = BTreeSet::new();
  for &(t, k) in &occ {
    let (i, j) = TET_EDGES[k];
    for slot in (0..4).filter(|&s| s != i && s != j) {
      removed.insert(c.tets[t].faces[slot]);
    }
  }
  if removed.len() != 3 {
    return Err(mismatch(format!("edge {e} is not surrounded by three distinct triangles")));
  }
  let (mut s, corner_local) = Surgery::from_tets(c, &tets, &removed)?;
  if s.local_vertex.len() != 5 {
    return Err(mismatch("the three tetrahedra do not span five corners"));
  }
  s.colour()?;
  let (i, j) = TET_EDGES[occ[0].1];
  let (p, q) = (corner_local[0][i], corner_local[0][j]);
  let link: Vec<usize> = (0..5).filter(|&l| l != p && l != q).collect();
  let face_colours: BTreeSet<Colour> = link.iter().map(|&l| s.colours[l]).collect();
  if face_colours.len() == 1 {
    let side = *face_colours.iter().next().expect("one colour");
    if side != Colour::N && s.colours[p] != side && s.colours[q] != side {
      return Err(Error::WouldBreakTransversality("removing the edge would split a defect tube".into()));
    }
  }
  s.new_tets = vec![[link[0], link[1], link[2], p], [link[0], link[1], link[2], q]];
  s.finish()
}

fn one_four(c: &DefectComplex, t: usize, placement: Placement) -> Result<MoveOutcome> {
  let (mut s, corner_local) = Surgery::from_tets(c, &[t], &BTreeSet::new())?;
  s.colour()?;
  let l = corner_local[0];
  let n = s.add_new_vertex(&l, placement)?;
  s.new_tets = TET_FACES.iter().map(|f| [l[f[0]], l[f[1]], l[f[2]], n]).collect();
  s.finish()
}

fn four_one(c: &DefectComplex, v: usize) -> Result<MoveOutcome> {
  if c.is_boundary_vertex(v) {
    return Err(mismatch(format!("vertex {v} is on the boundary")));
  }
  let corners = vertex_corners(c, v);
  let tets: Vec<usize> = corners.iter().map(|x| x.0).collect();
  if corners.len() != 4 || tets.iter().collect::<BTreeSet<_>>().len() != 4 {
    return Err(mismatch(format!("vertex {v} does not have degree 4")));
  }
  let mut removed = BTreeSet::new();
  for &(t, i) in &corners {
    for slot in (0..4).filter(|&s| s != i) {
      removed.insert(c.tets[t].faces[slot]);
    }
  }
  if removed.len() != 6 {
    return Err(mismatch(format!("vertex {v} is not surrounded by six distinct triangles")));
  }
  let (mut s, corner_local) = Surgery::from_tets(c, &tets, &removed)?;
  if s.local_vertex.len() != 5 {
    return Err(mismatch("the four tetrahedra do not span five corners"));
  }
  s.colour()?;
  let centre = corner_local[0][corners[0].1];
  let others: Vec<usize> = (0..5).filter(|&l| l != centre).collect();
  let side = s.colours[centre];
  if side != Colour::N && !others.iter().any(|&l| s.colours[l] == side) {
    return Err(Error::WouldBreakTransversality("removing the vertex would remove a defect component".into()));
  }
  s.new_tets = vec![[others[0], others[1], others[2], others[3]]];
  s.finish()
}

fn stellar_edge(c: &DefectComplex, e: usize, placement: Placement) -> Result<MoveOutcome> {
  if c.is_boundary_edge(e) {
    return Err(mismatch(format!("edge {e} is on the boundary")));
  }
  let occ = edge_occurrences(c, e);
  let tets: Vec<usize> = occ.iter().map(|o| o.0).collect();
  if occ.is_empty() || tets.iter().collect::<BTreeSet<_>>().len() != occ.len() {
    return Err(mismatch(format!("edge {e} occurs twice in a tetrahedron")));
  }
  let mut removed = BTreeSet::new();
  for &(t, k) in &occ {
    let (i, j) = TET_EDGES[k];
    for slot in (0..4).filter(|&s| s != i && s != j) {
      removed.insert(c.tets[t].faces[slot]);
    }
  }
  let (mut s, corner_local) = Surgery::from_tets(c, &tets, &removed)?;
  if s.local_vertex.len() != occ.len() + 2 {
    return Err(mismatch("the star of the edge is not a ball"));
  }
  s.colour()?;
  let (i, j) = TET_EDGES[occ[0].1];
  let (a, b) = (corner_local[0][i], corner_local[0][j]);
  let n = s.add_new_vertex(&[a, b], placement)?;
  for (ti, &(_, k)) in occ.iter().enumerate() {
    let (i, j) = TET_EDGES[k];
    let rest: Vec<usize> = (0..4).filter(|&x| x != i && x != j).map(|x| corner_local[ti][x]).collect();
    let (ai, bj) = (corner_local[ti][i], corner_local[ti][j]);
    s.new_tets.push([n, ai, rest[0], rest[1]]);
    s.new_tets.push([n, bj, rest[0], rest[1]]);
  }
  s.finish()
}

fn stellar_triangle(c: &DefectComplex, f: usize, placement: Placement) -> Result<MoveOutcome> {
  let inc = c.triangle_tets(f).to_vec();
  if inc.len() != 2 || inc[0].0 == inc[1].0 {
    return Err(mismatch(format!("triangle {f} is not internal to two distinct tetrahedra")));
  }
  let tets = [inc[0].0, inc[1].0];
  let (mut s, corner_local) = Surgery::from_tets(c, &tets, &BTreeSet::from([f]))?;
  if s.local_vertex.len() != 5 {
    return Err(mismatch("the two tetrahedra do not span five corners"));
  }
  s.colour()?;
  let tri = TET_FACES[inc[0].1].map(|i| corner_local[0][i]);
  let p = corner_local[0][inc[0].1];
  let q = corner_local[1][inc[1].1];
  let n = s.add_new_vertex(&tri, placement)?;
  let [a, b, cc] = tri;
  for apex in [p, q] {
    s.new_tets.push([n, a, b, apex]);
    s.new_tets.push([n, b, cc, apex]);
    s.new_tets.push([n, a, cc, apex]);
  }
  s.finish()
}

fn shelling(c: &DefectComplex, t: usize) -> Result<MoveOutcome> {
  let slots: Vec<usize> = (0..4).filter(|&s| c.is_boundary_triangle(c.tets[t].faces[s])).collect();
  let fr = c.frame_unchecked(t);
  match slots.len() {
    1 => {
      if c.is_boundary_vertex(fr.verts[slots[0]]) {
        return Err(mismatch("the vertex opposite the boundary face lies on the boundary"));
      }
    }
    2 => {
      let opposite = super::tet_edge_index(slots[0], slots[1]);
      if c.is_boundary_edge(fr.edges[opposite]) {
        return Err(mismatch("the edge opposite the common boundary edge lies on the boundary"));
      }
    }
    3 => {}
    n => return Err(mismatch(format!("tet {t} meets the boundary in {n} faces"))),
  }
  let (s, _) = Surgery::from_tets(c, &[t], &BTreeSet::new())?;
  s.finish()
}

fn inverse_shelling(c: &DefectComplex, faces: &[usize], placement: Placement) -> Result<MoveOutcome> {
  if faces.is_empty() || faces.len() > 3 || faces.iter().collect::<BTreeSet<_>>().len() != faces.len() {
    return Err(mismatch("inverse shelling takes one, two or three distinct boundary triangles"));
  }
  for &f in faces {
    if f >= c.triangles.len() || !c.is_boundary_triangle(f) {
      return Err(mismatch(format!("triangle {f} is not a boundary triangle")));
    }
  }
  // Corners of each face; shared edges identify corners.
  let k = faces.len();
  let mut uf = UnionFind::new(k * 3);
  let corner_vertex = |f: usize| {
    let t = c.triangles[f];
    let (e01, e12) = (c.edges[t.edges[0]], c.edges[t.edges[1]]);
    [e01.tail, e01.head, e12.head]
  };
  let face_edge_corners = [(0usize, 1usize), (1, 2), (0, 2)];
  for a in 0..k {
    for b in a + 1..k {
      let (ta, tb) = (c.triangles[faces[a]], c.triangles[faces[b]]);
      let mut shared = 0;
      for (ia, &ea) in ta.edges.iter().enumerate() {
        for (ib, &eb) in tb.edges.iter().enumerate() {
          if ea == eb {
            shared += 1;
            let (pa, pb) = (face_edge_corners[ia], face_edge_corners[ib]);
            uf.union(a * 3 + pa.0, b * 3 + pb.0);
            uf.union(a * 3 + pa.1, b * 3 + pb.1);
          }
        }
      }
      if shared != 1 {
        return Err(mismatch("the boundary triangles must pairwise share exactly one edge"));
      }
    }
  }
  let mut local_of = BTreeMap::new();
  let mut local_vertex = Vec::new();
  let mut corner_local = vec![[0usize; 3]; k];
  for (a, &f) in faces.iter().enumerate() {
    let cv = corner_vertex(f);
    for i in 0..3 {
      let root = uf.find(a * 3 + i);
      let l = *local_of.entry(root).or_insert_with(|| {
        local_vertex.push(Some(cv[i]));
        local_vertex.len() - 1
      });
      corner_local[a][i] = l;
    }
  }
  let mut s = Surgery {
    c,
    removed: Vec::new(),
    local_vertex,
    edge_of: HashMap::new(),
    face_of: HashMap::new(),
    colours: Vec::new(),
    area: None,
    new_region: None,
    new_tets: Vec::new(),
  };
  for (a, &f) in faces.iter().enumerate() {
    let t = c.triangles[f];
    let l = corner_local[a];
    for (ie, &(x, y)) in face_edge_corners.iter().enumerate() {
      s.add_edge(l[x], l[y], t.edges[ie])?;
    }
    let (tet, slot) = c.triangle_tets(f)[0];
    s.add_face(l, f, -c.induced_sign(tet, slot))?;
  }
  s.colour()?;
  let n_loc = s.local_vertex.len();
  match k {
    1 => {
      let l = corner_local[0];
      let n = s.add_new_vertex(&l, placement)?;
      s.new_tets = vec![[l[0], l[1], l[2], n]];
    }
    2 => {
      if n_loc != 4 {
        return Err(mismatch("the two triangles do not span four corners"));
      }
      let shared: Vec<usize> = (0..4).filter(|l| corner_local[0].contains(l) && corner_local[1].contains(l)).collect();
      let apexes: Vec<usize> = (0..4).filter(|l| !shared.contains(l)).collect();
      let (x, y) = (s.local_vertex[apexes[0]].expect("old"), s.local_vertex[apexes[1]].expect("old"));
      if x == y || c.edges.iter().any(|e| (e.tail, e.head) == (x, y) || (e.tail, e.head) == (y, x)) {
        return Err(mismatch("the new edge would duplicate an existing edge"));
      }
      s.new_tets = vec![[0, 1, 2, 3]];
    }
    _ => {
      if n_loc != 4 {
        return Err(mismatch("the three triangles do not span four corners"));
      }
      let centre = (0..4).find(|l| corner_local.iter().all(|cl| cl.contains(l))).ok_or_else(|| mismatch("no common vertex"))?;
      let v = s.local_vertex[centre].expect("old");
      let degree = c.boundary_triangles().iter().filter(|&&f| corner_vertex(f).contains(&v)).count();
      if degree != 3 {
        return Err(mismatch("the common vertex must have exactly three boundary triangles"));
      }
      s.new_tets = vec![[0, 1, 2, 3]];
    }
  }
  s.finish()
}

/// Structurally plausible moves on internal cells (2-3, 3-2, 1-4, 4-1 and stellar
/// subdivisions), with both placements for cells meeting the defect surface. Whether a
/// candidate is legal is decided by [`apply_move`].
pub fn candidate_moves(c: &DefectComplex) -> Vec<MoveDescriptor> {
  let mut out = Vec::new();
  let colours = c.vertex_colours();
  let placements = |verts: &[usize]| -> Vec<Placement> {
    let set: BTreeSet<Colour> = verts.iter().map(|&v| colours[v]).collect();
    if set.len() > 1 {
      vec![Placement::C, Placement::D]
    } else {
      vec![Placement::Auto]
    }
  };
  for f in 0..c.triangles.len() {
    let inc = c.triangle_tets(f);
    if inc.len() == 2 && inc[0].0 != inc[1].0 {
      out.push(MoveDescriptor::new(MoveKind::TwoThree, vec![f]));
      let t = c.triangles[f];
      let (e01, e12) = (c.edges[t.edges[0]], c.edges[t.edges[1]]);
      for p in placements(&[e01.tail, e01.head, e12.head]) {
        out.push(MoveDescriptor::placed(MoveKind::StellarTriangle, vec![f], p));
      }
    }
  }
  let mut degree = vec![0usize; c.edges.len()];
  let mut corners = vec![0usize; c.vertices.len()];
  for t in 0..c.tets.len() {
    let fr = c.frame_unchecked(t);
    for &e in &fr.edges {
      degree[e] += 1;
    }
    for &v in &fr.verts {
      corners[v] += 1;
    }
    for p in placements(&fr.verts) {
      out.push(MoveDescriptor::placed(MoveKind::OneFour, vec![t], p));
    }
  }
  for e in 0..c.edges.len() {
    if c.is_boundary_edge(e) {
      continue;
    }
    if degree[e] == 3 {
      out.push(MoveDescriptor::new(MoveKind::ThreeTwo, vec![e]));
    }
    let edge = c.edges[e];
    for p in placements(&[edge.tail, edge.head]) {
      out.push(MoveDescriptor::placed(MoveKind::StellarEdge, vec![e], p));
    }
  }
  for v in 0..c.vertices.len() {
    if !c.is_boundary_vertex(v) && corners[v] == 4 {
      out.push(MoveDescriptor::new(MoveKind::FourOne, vec![v]));
    }
  }
  out
}

/// Size limits for [`random_walk`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkLimits {
  /// Moves that add a vertex are avoided once the complex has this many vertices.
  pub max_vertices: usize,
  /// Moves that add tetrahedra are avoided once the complex has this many.
  pub max_tets:     usize,
}

/// One applied move of a [`random_walk`].
#[derive(Clone, Debug)]
pub struct WalkStep {
  /// The move.
  pub descriptor: MoveDescriptor,
  /// Its outcome.
  pub outcome:    MoveOutcome,
}

/// Applies up to `steps` legal moves chosen uniformly among the legal
/// [`candidate_moves`], using a seeded ChaCha generator. The limits are soft: moves
/// that grow the complex past them are only taken when no other move applies. Stops
/// early if no candidate applies at all.
pub fn random_walk(c: &DefectComplex, steps: usize, seed: u64, limits: WalkLimits) -> Vec<WalkStep> {
  use rand::seq::SliceRandom;
  use rand::SeedableRng;
  let grows_vertices = |k: MoveKind| matches!(k, MoveKind::OneFour | MoveKind::StellarEdge | MoveKind::StellarTriangle);
  let grows_tets = |k: MoveKind| grows_vertices(k) || matches!(k, MoveKind::TwoThree);
  let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
  let mut current = c.clone();
  let mut out = Vec::with_capacity(steps);
  for _ in 0..steps {
    let mut cands = candidate_moves(&current);
    cands.shuffle(&mut rng);
    let within = |m: &MoveDescriptor| {
      (current.num_vertices() < limits.max_vertices || !grows_vertices(m.kind))
        && (current.tets().len() < limits.max_tets || !grows_tets(m.kind))
    };
    let (inside, outside): (Vec<_>, Vec<_>) = cands.into_iter().partition(within);
    let Some((descriptor, outcome)) =
      inside.into_iter().chain(outside).find_map(|m| apply_move_tracked(&current, &m).ok().map(|o| (m, o)))
    else {
      break;
    };
    current = outcome.complex.clone();
    out.push(WalkStep { descriptor, outcome });
  }
  out
}
