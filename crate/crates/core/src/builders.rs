//! Constructors for the standard closed fixtures and the example defect geometries.
//!
//! Every builder returns a complex that passes [`validate`](crate::complex::validate).
//! Bulk regions and defect areas carry backend names from [`Labels`]; a [`Theory`]
//! registering those names is needed to evaluate them.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::algebra::{BiSet, FiniteGroup};
use crate::backend::{BimoduleBackend, FusionBackend};
use crate::complex::{Area, ComplexBuilder, DefectComplex, Edge, EdgeKind, Region, Tet, TetClass, Triangle};
use crate::error::{Error, Result};
use crate::statesum::{BoundaryData, Theory};

/// Backend names used by the defect builders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
  /// Fusion backend of the `C`-side region (heads of defect edges).
  pub c:    String,
  /// Fusion backend of the `D`-side region (tails of defect edges).
  pub d:    String,
  /// Bimodule backend of the defect area.
  pub area: String,
}

impl Default for Labels {
  fn default() -> Self { Self { c: "G".into(), d: "Gp".into(), area: "X".into() } }
}

impl Labels {
  /// The labels of the knot-complement construction: the tube around the knot is the
  /// `D`-side, labeled `1` for the trivial group.
  pub fn knot() -> Self { Self { c: "G".into(), d: "1".into(), area: "X".into() } }

  /// A theory with `Vec_G` on the `C`-side, `Vec_{G'}` on the `D`-side and the biset
  /// `x` (a `(G, G')`-biset) on the area.
  pub fn theory(&self, x: BiSet) -> Theory {
    let (g, gp) = (x.left_group().clone(), x.right_group().clone());
    Theory::new()
      .with_fusion(&self.c, FusionBackend::untwisted(g))
      .with_fusion(&self.d, FusionBackend::untwisted(gp))
      .with_bimodule(&self.area, BimoduleBackend::new(x))
  }
}

/// Raw cell lists assembled by hand, for builders that need loops or multiple edges.
struct Raw {
  regions:   Vec<Region>,
  areas:     Vec<Area>,
  vertices:  Vec<usize>,
  edges:     Vec<Edge>,
  triangles: Vec<Triangle>,
  tets:      Vec<Tet>,
  shared:    HashMap<[usize; 3], usize>,
}

impl Raw {
  /// Regions `0 = C`, `1 = D` and one area between them.
  fn two_sided(labels: &Labels) -> Self {
    Self {
      regions:   vec![Region { backend: labels.c.clone() }, Region { backend: labels.d.clone() }],
      areas:     vec![Area { backend: labels.area.clone(), c_region: 0, d_region: 1 }],
      vertices:  Vec::new(),
      edges:     Vec::new(),
      triangles: Vec::new(),
      tets:      Vec::new(),
      shared:    HashMap::new(),
    }
  }

  fn vertex(&mut self, region: usize) -> usize {
    self.vertices.push(region);
    self.vertices.len() - 1
  }

  /// A bulk edge if both ends share a region, otherwise a defect edge of area 0.
  fn edge(&mut self, tail: usize, head: usize) -> usize {
    let (rt, rh) = (self.vertices[tail], self.vertices[head]);
    let kind = if rt == rh { EdgeKind::Bulk(rt) } else { EdgeKind::Defect(0) };
    self.edges.push(Edge { tail, head, kind });
    self.edges.len() - 1
  }

  fn triangle(&mut self, e01: usize, e12: usize, e02: usize) -> usize {
    self.triangles.push(Triangle::from_branching(e01, e12, e02));
    self.triangles.len() - 1
  }

  /// The triangle with these edges, shared between all callers.
  fn shared_triangle(&mut self, e: [usize; 3]) -> usize {
    if let Some(&f) = self.shared.get(&e) {
      return f;
    }
    let f = self.triangle(e[0], e[1], e[2]);
    self.shared.insert(e, f);
    f
  }

  fn tet(&mut self, faces: [usize; 4]) {
    self.tets.push(Tet { faces, orient: 1, class: TetClass::Bulk });
  }

  /// A tetrahedron from its edges in the order `01, 02, 03, 12, 13, 23`, with faces
  /// shared by edge triple.
  fn tet_from_edges(&mut self, e: [usize; 6]) {
    let [e01, e02, e03, e12, e13, e23] = e;
    let faces = [
      self.shared_triangle([e12, e23, e13]),
      self.shared_triangle([e02, e23, e03]),
      self.shared_triangle([e01, e13, e03]),
      self.shared_triangle([e01, e12, e02]),
    ];
    self.tet(faces);
  }

  fn finish(self) -> Result<DefectComplex> {
    let mut c = DefectComplex::from_parts(self.regions, self.areas, self.vertices, self.edges, self.triangles, self.tets);
    c.recompute_classes();
    c.orient_consistently()?;
    Ok(c)
  }
}

/// The boundary of the 4-simplex: vertices `0..5`, tet `i` omits vertex `i`. One region
/// labeled `G`.
pub fn s3_five_tets() -> DefectComplex {
  let mut b = ComplexBuilder::new();
  let r = b.add_region("G");
  b.add_vertices(r, 5);
  for i in 0..5 {
    let vs: Vec<usize> = (0..5).filter(|&v| v != i).collect();
    let orient = if i % 2 == 0 { 1 } else { -1 };
    b.add_tet([vs[0], vs[1], vs[2], vs[3]], orient).expect("simplicial input");
  }
  b.build()
}

/// A triangle of a [`Surface`], with edges in branching order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceTriangle {
  /// Edge ids `[e01, e12, e02]`.
  pub edges:  [usize; 3],
  /// `+1` if the branching order agrees with the surface orientation.
  pub orient: i8,
}

/// A branched triangulated surface, possibly with boundary (a 2-dimensional Δ-complex).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surface {
  /// Number of vertices.
  pub num_vertices: usize,
  /// Directed edges `(tail, head)`.
  pub edges:        Vec<(usize, usize)>,
  /// Triangles.
  pub triangles:    Vec<SurfaceTriangle>,
}

impl Surface {
  /// `V − E + F`.
  pub fn euler_characteristic(&self) -> i64 {
    self.num_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
  }

  /// The corners `[v0, v1, v2]` of a triangle.
  pub fn corners(&self, f: usize) -> [usize; 3] {
    let [e01, e12, _] = self.triangles[f].edges;
    [self.edges[e01].0, self.edges[e01].1, self.edges[e12].1]
  }

  /// Whether every edge lies in one or two triangles, and two triangles sharing an edge
  /// induce opposite orientations on it.
  pub fn is_oriented(&self) -> bool {
    self.edge_uses().iter().all(|&(n, s)| (n == 1 && s.abs() == 1) || (n == 2 && s == 0))
  }

  /// Whether every edge lies in exactly two triangles.
  pub fn is_closed(&self) -> bool { self.edge_uses().iter().all(|&(n, _)| n == 2) }

  /// Per edge: the number of triangles using it and the sum of induced signs.
  fn edge_uses(&self) -> Vec<(usize, i32)> {
    let mut sum = vec![(0usize, 0i32); self.edges.len()];
    for t in &self.triangles {
      for (k, &e) in t.edges.iter().enumerate() {
        let sign = if k == 2 { -1 } else { 1 };
        sum[e].0 += 1;
        sum[e].1 += (sign * t.orient) as i32;
      }
    }
    sum
  }

  /// Extends a partial edge labeling by group elements to a flat one
  /// (`l(e02) = l(e12)·l(e01)` on every triangle), or `None` if the given labels do not
  /// determine one.
  pub fn extend_flat(&self, group: &FiniteGroup, known: &[Option<usize>]) -> Option<Vec<usize>> {
    let mut l: Vec<Option<usize>> = known.to_vec();
    l.resize(self.edges.len(), None);
    loop {
      let mut progress = false;
      for t in &self.triangles {
        let [a, b, c] = t.edges;
        match (l[a], l[b], l[c]) {
          (Some(x), Some(y), None) => l[c] = Some(group.mul(y, x)),
          (Some(x), None, Some(z)) => l[b] = Some(group.mul(z, group.inv(x))),
          (None, Some(y), Some(z)) => l[a] = Some(group.mul(group.inv(y), z)),
          _ => continue,
        }
        progress = true;
      }
      if !progress {
        break;
      }
    }
    let l: Vec<usize> = l.into_iter().collect::<Option<_>>()?;
    self.is_flat(group, &l).then_some(l)
  }

  /// Whether an edge labeling is flat.
  pub fn is_flat(&self, group: &FiniteGroup, l: &[usize]) -> bool {
    self.triangles.iter().all(|t| l[t.edges[2]] == group.mul(l[t.edges[1]], l[t.edges[0]]))
  }
}

/// The one-vertex triangulation of the closed oriented surface of genus `g ≥ 1` obtained
/// from the 4g-gon with side word `a₁b₁a₁⁻¹b₁⁻¹⋯`, fanned from one corner.
///
/// Edges `2i` and `2i + 1` are the generators `aᵢ` and `bᵢ`; the remaining edges are
/// the fan diagonals.
pub fn surface_triangulation(g: usize) -> Result<Surface> {
  if g == 0 {
    return Err(Error::InvalidComplex("surface_triangulation needs genus at least 1".into()));
  }
  let n = 4 * g;
  // Side k joins polygon corners k and k + 1; `forward` when its edge runs that way.
  let side = |k: usize| -> (usize, bool) {
    let i = k / 4;
    match k % 4 {
      0 => (2 * i, true),
      1 => (2 * i + 1, true),
      2 => (2 * i, false),
      _ => (2 * i + 1, false),
    }
  };
  let mut edges = vec![(0, 0); 2 * g];
  // Edge from corner 0 to corner k.
  let mut from0 = vec![usize::MAX; n];
  from0[1] = 0;
  from0[n - 1] = 2 * g - 1;
  for k in 2..n - 1 {
    from0[k] = edges.len();
    edges.push((0, 0));
  }
  let mut triangles = Vec::new();
  for k in 1..n - 1 {
    let (s, forward) = side(k);
    let t = if forward {
      SurfaceTriangle { edges: [from0[k], s, from0[k + 1]], orient: 1 }
    } else {
      SurfaceTriangle { edges: [from0[k + 1], s, from0[k]], orient: -1 }
    };
    triangles.push(t);
  }
  Ok(Surface { num_vertices: 1, edges, triangles })
}

/// The disc made of `n ≥ 1` triangles `[0, i, i + 1]` fanned from rim vertex `0`; no
/// interior vertices. Edges: `0 → i` is edge `i − 1` for `i = 1..=n + 1`, and the rim
/// edge `i → i + 1` is edge `n + i` for `i = 1..=n`.
pub fn fan_disc(n: usize) -> Result<Surface> {
  if n == 0 {
    return Err(Error::InvalidComplex("a fan disc needs at least one triangle".into()));
  }
  let mut edges: Vec<(usize, usize)> = (1..=n + 1).map(|i| (0, i)).collect();
  edges.extend((1..=n).map(|i| (i, i + 1)));
  let triangles = (1..=n).map(|i| SurfaceTriangle { edges: [i - 1, n + i, i], orient: 1 }).collect();
  Ok(Surface { num_vertices: n + 2, edges, triangles })
}

/// The disc made of `n ≥ 3` triangles around the interior vertex `0`, with rim
/// vertices `1..=n`. Edge `i − 1` is the spoke `0 → i`; edge `n + i − 1` is the rim edge
/// `i → i + 1` for `i < n`, and edge `2n − 1` is the rim edge `1 → n`.
pub fn wheel_disc(n: usize) -> Result<Surface> {
  if n < 3 {
    return Err(Error::InvalidComplex("a wheel disc needs at least three triangles".into()));
  }
  let mut edges: Vec<(usize, usize)> = (1..=n).map(|i| (0, i)).collect();
  edges.extend((1..n).map(|i| (i, i + 1)));
  edges.push((1, n));
  let mut triangles: Vec<SurfaceTriangle> =
    (1..n).map(|i| SurfaceTriangle { edges: [i - 1, n + i - 1, i], orient: 1 }).collect();
  triangles.push(SurfaceTriangle { edges: [0, 2 * n - 1, n - 1], orient: -1 });
  Ok(Surface { num_vertices: n + 1, edges, triangles })
}

/// Edge-id layout of [`prism_cylinder`] for a surface with `e` edges and `v` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CylinderLayout {
  /// Number of surface edges.
  pub surface_edges:    usize,
  /// Number of surface vertices.
  pub surface_vertices: usize,
}

impl CylinderLayout {
  /// Bottom (`D`-side, `{0}×Σ`) copy of surface edge `k`.
  pub fn bottom(&self, k: usize) -> usize { k }

  /// Top (`C`-side, `{1}×Σ`) copy of surface edge `k`.
  pub fn top(&self, k: usize) -> usize { self.surface_edges + k }

  /// Vertical defect edge over surface vertex `v`.
  pub fn vertical(&self, v: usize) -> usize { 2 * self.surface_edges + v }

  /// Diagonal defect edge of the side square over surface edge `k`.
  pub fn diagonal(&self, k: usize) -> usize { 2 * self.surface_edges + self.surface_vertices + k }

  /// The boundary labeling with `bottom[k]` on the bottom and `top[k]` on the top copy
  /// of edge `k`.
  pub fn boundary(&self, bottom: &[usize], top: &[usize]) -> BoundaryData {
    BoundaryData::from_labels(
      bottom.iter().enumerate().map(|(k, &l)| (self.bottom(k), l)).chain(top.iter().enumerate().map(|(k, &l)| (self.top(k), l))),
    )
  }
}

/// The cylinder `[0, 1] × Σ` with the defect surface `{½} × Σ` (Σ may have boundary), each prism over a
/// triangle `[a b c]` of `Σ` cut into `[a₀b₀c₀c₁]` (type a), `[a₀b₀b₁c₁]` (type b) and
/// `[a₀a₁b₁c₁]` (type a). The bottom `{0} × Σ` lies in the `D`-side region, the top in
/// the `C`-side region; see [`CylinderLayout`] for edge ids.
pub fn prism_cylinder(sigma: &Surface, labels: &Labels) -> Result<(DefectComplex, CylinderLayout)> {
  if !sigma.is_oriented() {
    return Err(Error::NotOrientable("surface triangles do not induce opposite orientations on shared edges".into()));
  }
  let (nv, ne) = (sigma.num_vertices, sigma.edges.len());
  let layout = CylinderLayout { surface_edges: ne, surface_vertices: nv };
  let mut raw = Raw::two_sided(labels);
  let v0: Vec<usize> = (0..nv).map(|_| raw.vertex(1)).collect();
  let v1: Vec<usize> = (0..nv).map(|_| raw.vertex(0)).collect();
  for &(t, h) in &sigma.edges {
    raw.edge(v0[t], v0[h]);
  }
  for &(t, h) in &sigma.edges {
    raw.edge(v1[t], v1[h]);
  }
  for v in 0..nv {
    raw.edge(v0[v], v1[v]);
  }
  for &(t, h) in &sigma.edges {
    raw.edge(v0[t], v1[h]);
  }
  let (e0, e1, vert, diag) = (|k| layout.bottom(k), |k| layout.top(k), |v| layout.vertical(v), |k| layout.diagonal(k));
  // Side squares over each surface edge t → h: [t₀ h₀ h₁] and [t₀ t₁ h₁].
  let mut side_d = Vec::with_capacity(ne);
  let mut side_c = Vec::with_capacity(ne);
  for (k, &(t, h)) in sigma.edges.iter().enumerate() {
    side_d.push(raw.triangle(e0(k), vert(h), diag(k)));
    side_c.push(raw.triangle(vert(t), e1(k), diag(k)));
  }
  for f in 0..sigma.triangles.len() {
    let [ab, bc, ac] = sigma.triangles[f].edges;
    let bottom = raw.triangle(e0(ab), e0(bc), e0(ac));
    let top = raw.triangle(e1(ab), e1(bc), e1(ac));
    let inner1 = raw.triangle(e0(ab), diag(bc), diag(ac));
    let inner2 = raw.triangle(diag(ab), e1(bc), diag(ac));
    raw.tet([side_d[bc], side_d[ac], inner1, bottom]);
    raw.tet([side_c[bc], inner2, inner1, side_d[ab]]);
    raw.tet([top, inner2, side_c[ac], side_c[ab]]);
  }
  Ok((raw.finish()?, layout))
}

/// A single defect tetrahedron whose first `d ∈ {1, 2, 3}` vertices lie on the `D`
/// side: `d = 2` gives a type-b tetrahedron, `d = 1, 3` the two type-a tetrahedra.
/// Edges follow the vertex pairs `01, 02, 03, 12, 13, 23`.
pub fn defect_tet(d: usize, labels: &Labels) -> Result<DefectComplex> {
  if !(1..=3).contains(&d) {
    return Err(Error::InvalidComplex(format!("a defect tetrahedron has 1 to 3 D-side vertices, not {d}")));
  }
  let mut raw = Raw::two_sided(labels);
  let v: Vec<usize> = (0..4).map(|i| raw.vertex(if i < d { 1 } else { 0 })).collect();
  let e: Vec<usize> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].iter().map(|&(a, b)| raw.edge(v[a], v[b])).collect();
  raw.tet_from_edges([e[0], e[1], e[2], e[3], e[4], e[5]]);
  raw.finish()
}

/// The cone over the boundary of `c` from a new internal vertex: a ball with the same
/// boundary triangulation and no defects. Returns the cone and, for every edge of `c`,
/// the corresponding edge of the cone (boundary edges only).
pub fn plain_ball(c: &DefectComplex) -> Result<(DefectComplex, Vec<Option<usize>>)> {
  let bverts = c.boundary_vertices();
  let region = match bverts.first() {
    Some(&v) => c.vertex_regions()[v],
    None => return Err(Error::InvalidComplex("complex has no boundary".into())),
  };
  if bverts.iter().any(|&v| c.vertex_regions()[v] != region) {
    return Err(Error::InvalidComplex("boundary meets several regions".into()));
  }
  let mut b = Raw {
    regions:   vec![c.regions()[region].clone()],
    areas:     Vec::new(),
    vertices:  Vec::new(),
    edges:     Vec::new(),
    triangles: Vec::new(),
    tets:      Vec::new(),
    shared:    HashMap::new(),
  };
  let mut vmap = vec![usize::MAX; c.num_vertices()];
  for &v in &bverts {
    vmap[v] = b.vertex(0);
  }
  let apex = b.vertex(0);
  let mut emap = vec![None; c.edges().len()];
  for e in c.boundary_edges() {
    let x = c.edges()[e];
    emap[e] = Some(b.edge(vmap[x.tail], vmap[x.head]));
  }
  let spoke: HashMap<usize, usize> = bverts.iter().map(|&v| (v, b.edge(vmap[v], apex))).collect();
  for f in c.boundary_triangles() {
    let [e01, e12, e02] = c.triangles()[f].edges;
    let (v0, v1, v2) = (c.edges()[e01].tail, c.edges()[e01].head, c.edges()[e12].head);
    let m = |e: usize| emap[e].expect("boundary edge");
    b.tet_from_edges([m(e01), m(e02), spoke[&v0], m(e12), spoke[&v1], spoke[&v2]]);
  }
  Ok((b.finish()?, emap))
}

/// Transports boundary labels along an edge map such as the one of [`plain_ball`].
pub fn transport_boundary(b: &BoundaryData, emap: &[Option<usize>]) -> BoundaryData {
  BoundaryData::from_labels(b.labels().filter_map(|(e, l)| emap.get(e).copied().flatten().map(|f| (f, l))))
}

/// A 3-ball made of four tetrahedra coned from one internal `D`-side vertex over the
/// boundary of a tetrahedron; the defect sphere separates the cone point from the
/// `C`-side boundary. Boundary edges are `0..6`.
pub fn ball_with_defect_sphere(labels: &Labels) -> Result<DefectComplex> {
  let mut raw = Raw::two_sided(labels);
  let centre = raw.vertex(1);
  let outer: Vec<usize> = (0..4).map(|_| raw.vertex(0)).collect();
  let mut edge = HashMap::new();
  for i in 0..4 {
    for j in i + 1..4 {
      edge.insert((i, j), raw.edge(outer[i], outer[j]));
    }
  }
  let spoke: Vec<usize> = (0..4).map(|i| raw.edge(centre, outer[i])).collect();
  for skip in (0..4).rev() {
    let [i, j, k]: [usize; 3] = (0..4).filter(|&x| x != skip).collect::<Vec<_>>().try_into().expect("three corners");
    raw.tet_from_edges([spoke[i], spoke[j], spoke[k], edge[&(i, j)], edge[&(i, k)], edge[&(j, k)]]);
  }
  raw.finish()
}

/// A 3-ball with a defect surface of genus `g ≥ 1` bounding a handlebody on the
/// `D`-side.
///
/// Handle `r` is a square double pyramid over the square `M N Q P` (sides `i: M→N`,
/// `j: M→P`, `k: Q→N`, `l: Q→P`, diagonal `c_r: N→P`) between the `D`-side apices
/// `A_{r+1} → A_r`, made of two triangular double pyramids of three type-b tetrahedra
/// around their axes `d_r` and `d'_r`. Consecutive handles share the apex and four
/// faces; the stack is capped by square pyramids over `A_1` and `A_{g+1}` with the
/// `C`-side apices `V_1` and `V_2`. The boundary is the octahedron on `M, N, Q, P, V_1,
/// V_2` with edges `0..12`: `i, j, k, l`, then `x_s: M→V_s, y_s: N→V_s, w_s: P→V_s,
/// z_s: Q→V_s` for `s = 1, 2`.
pub fn ball_with_genus_g(g: usize, labels: &Labels) -> Result<DefectComplex> {
  if g == 0 {
    return Err(Error::InvalidComplex("genus 0: use ball_with_defect_sphere".into()));
  }
  let mut raw = Raw::two_sided(labels);
  // Apices in branching order A_{g+1} < … < A_1; apex[r] is A_{r+1}.
  let ids: Vec<usize> = (0..=g).map(|_| raw.vertex(1)).collect();
  let apex: Vec<usize> = (0..=g).map(|r| ids[g - r]).collect();
  let [m, q, n, p, v1, v2] = [0; 6].map(|_| raw.vertex(0));
  let (ei, ej, ek, el) = (raw.edge(m, n), raw.edge(m, p), raw.edge(q, n), raw.edge(q, p));
  // Cap edges x, y, w, z for each cap apex.
  let mut caps = Vec::new();
  for v in [v1, v2] {
    caps.push([raw.edge(m, v), raw.edge(n, v), raw.edge(p, v), raw.edge(q, v)]);
  }
  let c: Vec<usize> = (0..g).map(|_| raw.edge(n, p)).collect();
  // Handle r joins apex[r] (= A_{r+1}) and apex[r + 1] (= A_{r+2}); d runs downwards.
  let d: Vec<usize> = (0..g).map(|r| raw.edge(apex[r + 1], apex[r])).collect();
  let dp: Vec<usize> = (0..g).map(|r| raw.edge(apex[r + 1], apex[r])).collect();
  // Defect edges m_s, n_s, p_s, q_s from each apex.
  let spokes: Vec<[usize; 4]> = apex.iter().map(|&a| [raw.edge(a, m), raw.edge(a, n), raw.edge(a, p), raw.edge(a, q)]).collect();
  let top = raw.edge(apex[0], v1);
  let bottom = raw.edge(apex[g], v2);
  for (s, cone) in [(0, top), (g, bottom)] {
    let [sm, sn, sp, sq] = spokes[s];
    let [x, y, w, z] = caps[if s == 0 { 0 } else { 1 }];
    raw.tet_from_edges([sm, sn, cone, ei, x, y]);
    raw.tet_from_edges([sm, sp, cone, ej, x, w]);
    raw.tet_from_edges([sq, sn, cone, ek, z, y]);
    raw.tet_from_edges([sq, sp, cone, el, z, w]);
  }
  for r in 0..g {
    let [um, un, up, uq] = spokes[r];
    let [lm, ln, lp, lq] = spokes[r + 1];
    // Vertex order A_{r+2} < A_{r+1} < …: lower spokes first.
    raw.tet_from_edges([d[r], lm, ln, um, un, ei]);
    raw.tet_from_edges([d[r], lm, lp, um, up, ej]);
    raw.tet_from_edges([d[r], ln, lp, un, up, c[r]]);
    raw.tet_from_edges([dp[r], lq, ln, uq, un, ek]);
    raw.tet_from_edges([dp[r], lq, lp, uq, up, el]);
    raw.tet_from_edges([dp[r], ln, lp, un, up, c[r]]);
  }
  raw.finish()
}

/// A triangulation of `S³` together with a closed dual cycle, given as tet ids.
#[derive(Clone, Debug)]
pub struct KnotFixture {
  /// The triangulation (one region labeled `G`).
  pub complex: DefectComplex,
  /// Consecutive tets share a face; the last shares one with the first.
  pub cycle:   Vec<usize>,
}

/// The unknot: three tetrahedra of [`s3_five_tets`] around the edge `{3, 4}`.
pub fn unknot_fixture() -> KnotFixture { KnotFixture { complex: s3_five_tets(), cycle: vec![0, 1, 2] } }

/// A trefoil: the closure of the 2-braid `σ₁³`, drawn as a closed path of unit cubes in
/// a `9 × 3 × 3` box, carried by the dual graph of the Kuhn triangulation of the box,
/// which is closed up to `S³` by a cone over its boundary.
pub fn trefoil_fixture() -> KnotFixture {
  let path = trefoil_cells();
  kuhn_knot([9, 3, 3], &path)
}

/// The cube path of [`trefoil_fixture`], with cubes indexed by their minimal corner.
fn trefoil_cells() -> Vec<[usize; 3]> {
  // Heights are shifted by one so the return arcs sit at z = 0.
  let mut lower = Vec::new(); // the strand starting at y = 0
  let mut upper = Vec::new(); // the strand starting at y = 2
  let (mut a, mut b) = (&mut lower, &mut upper);
  for k in [0, 3, 6] {
    a.extend([[k, 0, 1], [k, 0, 2], [k, 1, 2], [k, 2, 2], [k + 1, 2, 2], [k + 2, 2, 2], [k + 2, 2, 1]]);
    b.extend([[k, 2, 1], [k + 1, 2, 1], [k + 1, 1, 1], [k + 1, 0, 1], [k + 2, 0, 1]]);
    std::mem::swap(&mut a, &mut b);
  }
  // After an odd number of crossings each strand ends where the other one started.
  let ret = |y: usize| -> Vec<[usize; 3]> { (0..9).rev().map(|x| [x, y, 0]).collect() };
  // `lower` ends on y = 2, `upper` ends on y = 0.
  let mut cycle = lower;
  cycle.extend(ret(2));
  cycle.extend(upper);
  cycle.extend(ret(0));
  cycle
}

/// Builds the Kuhn triangulation of a box of cubes coned off to `S³` and routes a dual
/// cycle through the given closed path of face-adjacent cubes.
fn kuhn_knot(dims: [usize; 3], cells: &[[usize; 3]]) -> KnotFixture {
  let [nx, ny, nz] = dims;
  let vid = |x: usize, y: usize, z: usize| (x * (ny + 1) + y) * (nz + 1) + z;
  let mut b = ComplexBuilder::new();
  let r = b.add_region("G");
  b.add_vertices(r, (nx + 1) * (ny + 1) * (nz + 1));
  let apex = b.add_vertex(r);
  let mut cube_tets: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
  const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
  for x in 0..nx {
    for y in 0..ny {
      for z in 0..nz {
        let mut list = Vec::new();
        for perm in PERMS {
          let mut p = [x, y, z];
          let mut vs = [vid(x, y, z); 4];
          for (step, &axis) in perm.iter().enumerate() {
            p[axis] += 1;
            vs[step + 1] = vid(p[0], p[1], p[2]);
          }
          list.push(b.add_tet(vs, 1).expect("Kuhn simplex"));
        }
        cube_tets.insert([x, y, z], list);
      }
    }
  }
  // Cone the boundary squares, each split along its Kuhn diagonal, to the apex.
  let mut boundary = Vec::new();
  for axis in 0..3 {
    let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
    let (lo, hi) = (u.min(w), u.max(w));
    for side in [0, dims[axis]] {
      for a in 0..dims[lo] {
        for c in 0..dims[hi] {
          let corner = |da: usize, dc: usize| {
            let mut p = [0; 3];
            p[axis] = side;
            p[lo] = a + da;
            p[hi] = c + dc;
            vid(p[0], p[1], p[2])
          };
          boundary.push([corner(0, 0), corner(1, 0), corner(1, 1)]);
          boundary.push([corner(0, 0), corner(0, 1), corner(1, 1)]);
        }
      }
    }
  }
  for [p, q, s] in boundary {
    b.add_tet([p, q, s, apex], 1).expect("cone simplex");
  }
  let complex = b.build_oriented().expect("Kuhn triangulation is orientable");
  // Route the cycle: in each cube, walk from the entry tet to a tet on the exit face.
  let adjacent = |t: usize| -> Vec<(usize, usize)> {
    complex.tets()[t]
      .faces
      .iter()
      .flat_map(|&f| complex.triangle_tets(f).iter().filter(move |&&(u, _)| u != t).map(move |&(u, _)| (u, f)))
      .collect()
  };
  let n = cells.len();
  let owner: HashMap<usize, [usize; 3]> = cube_tets.iter().flat_map(|(&k, v)| v.iter().map(move |&t| (t, k))).collect();
  let crossing = |from: [usize; 3], to: [usize; 3]| -> Vec<(usize, usize)> {
    // (tet in `from`, tet in `to`) pairs across the shared square.
    cube_tets[&from].iter().flat_map(|&t| adjacent(t).into_iter().filter(|&(u, _)| owner.get(&u) == Some(&to)).map(move |(u, _)| (t, u))).collect()
  };
  let start = crossing(cells[n - 1], cells[0])[0];
  let mut cycle = Vec::new();
  let mut entry = start.1;
  for i in 0..n {
    let here = cells[i];
    let next = cells[(i + 1) % n];
    // Breadth-first search inside the cube.
    let mut prev: HashMap<usize, usize> = HashMap::from([(entry, entry)]);
    let mut queue = VecDeque::from([entry]);
    while let Some(t) = queue.pop_front() {
      for (u, _) in adjacent(t) {
        if owner.get(&u) == Some(&here) && !prev.contains_key(&u) {
          prev.insert(u, t);
          queue.push_back(u);
        }
      }
    }
    let exits: Vec<(usize, usize)> = if i + 1 == n { vec![start] } else { crossing(here, next) };
    let depth = |mut t: usize| {
      let mut d = 0;
      while prev[&t] != t {
        t = prev[&t];
        d += 1;
      }
      d
    };
    let &(exit, after) = exits.iter().filter(|(t, _)| prev.contains_key(t)).min_by_key(|(t, _)| depth(*t)).expect("cube is connected");
    let mut walk = vec![exit];
    while *walk.last().expect("nonempty") != entry {
      let t = prev[walk.last().expect("nonempty")];
      walk.push(t);
    }
    walk.reverse();
    cycle.extend(walk);
    entry = after;
  }
  KnotFixture { complex, cycle }
}

/// The defect torus around a dual knot (the knot-complement geometry).
///
/// Every tet of the cycle gets an interior vertex (1-4 move) and every face the cycle
/// passes through gets a midpoint (stellar subdivision), so the knot becomes a cycle of
/// edges. The new vertices form the `D`-side region `labels.d`, everything else the
/// `C`-side region `labels.c`: tets containing a knot edge become type b, tets meeting
/// the knot in a vertex only become type a. `t` must be simplicial (every tet is
/// determined by its four vertices).
pub fn knot_defect_complex(t: &DefectComplex, cycle: &[usize], labels: &Labels) -> Result<DefectComplex> {
  let n = cycle.len();
  if n < 3 {
    return Err(Error::NotASimpleCycle(format!("a dual cycle needs at least 3 tets, got {n}")));
  }
  if cycle.iter().collect::<BTreeSet<_>>().len() != n {
    return Err(Error::NotASimpleCycle("a tet is visited twice".into()));
  }
  let mut verts = Vec::with_capacity(t.tets().len());
  for k in 0..t.tets().len() {
    let fr = t.frame(k).ok_or_else(|| Error::InvalidComplex(format!("tet {k} is not framed")))?;
    let set: BTreeSet<usize> = fr.verts.iter().copied().collect();
    if set.len() != 4 {
      return Err(Error::InvalidComplex(format!("tet {k} is not simplicial")));
    }
    verts.push(fr.verts);
  }
  let mut seen_sets = BTreeSet::new();
  for v in &verts {
    let mut s = *v;
    s.sort_unstable();
    if !seen_sets.insert(s) {
      return Err(Error::InvalidComplex("two tets share their vertex set".into()));
    }
  }
  for &k in cycle {
    if k >= verts.len() {
      return Err(Error::NotASimpleCycle(format!("tet {k} does not exist")));
    }
  }
  // K-faces: the face shared by consecutive tets.
  let mut knot_faces: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
  for i in 0..n {
    let (a, b) = (cycle[i], cycle[(i + 1) % n]);
    let common: Vec<usize> = t.tets()[a].faces.iter().copied().filter(|f| t.tets()[b].faces.contains(f)).collect();
    if common.len() != 1 {
      return Err(Error::NotASimpleCycle(format!("tets {a} and {b} do not share exactly one face")));
    }
    let [e01, e12, _] = t.triangles()[common[0]].edges;
    knot_faces.push([t.edges()[e01].tail, t.edges()[e01].head, t.edges()[e12].head].into_iter().collect());
  }
  let mut b = ComplexBuilder::new();
  let outer = b.add_region(&labels.c);
  let inner = b.add_region(&labels.d);
  b.add_area(&labels.area, outer, inner);
  // Knot vertices first so that they precede the old vertices in every tet.
  let centre: Vec<usize> = (0..n).map(|_| b.add_vertex(inner)).collect();
  let mid: Vec<usize> = (0..n).map(|_| b.add_vertex(inner)).collect();
  let shift = b.add_vertices(outer, t.num_vertices())[0];
  let old = |v: usize| v + shift;
  let mut in_cycle = vec![None; verts.len()];
  for (i, &k) in cycle.iter().enumerate() {
    in_cycle[k] = Some(i);
  }
  let mut add = |mut vs: [usize; 4]| -> Result<()> {
    vs.sort_unstable();
    b.add_tet(vs, 1).map(|_| ())
  };
  for (k, vs) in verts.iter().enumerate() {
    let Some(i) = in_cycle[k] else {
      add(vs.map(old))?;
      continue;
    };
    // Faces entered from the previous tet and left to the next one.
    let entry = (&knot_faces[(i + n - 1) % n], mid[(i + n - 1) % n]);
    let exit = (&knot_faces[i], mid[i]);
    for skip in 0..4 {
      let face: BTreeSet<usize> = vs.iter().copied().filter(|&v| v != vs[skip]).collect();
      let f: Vec<usize> = face.iter().copied().collect();
      match [entry, exit].iter().find(|(kf, _)| **kf == face) {
        Some(&(_, m)) => {
          for (x, y) in [(0, 1), (1, 2), (0, 2)] {
            add([centre[i], m, old(f[x]), old(f[y])])?;
          }
        }
        None => add([centre[i], old(f[0]), old(f[1]), old(f[2])])?,
      }
    }
  }
  b.build_oriented()
}

/// The theory of the knot-complement geometry: `Vec_G` outside, the trivial group on
/// the tube and the one-point biset on the torus.
pub fn knot_theory(group: FiniteGroup) -> Theory {
  Labels::knot().theory(BiSet::trivial(group, FiniteGroup::trivial()))
}
