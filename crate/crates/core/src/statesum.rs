//! Labelings and exact evaluation of defect state sums.
//!
//! Every admissibility condition of a triangle with corners `0 < 1 < 2` compiles to the
//! uniform form `x02 = T[x12][x01]`: for bulk triangles `T` is the group product
//! (`l02 = l12·l01`), for `C`-side defect triangles (defect edges `01`, `02`, bulk edge
//! `12` labeled by `c`) it is the left action (`x02 = c ▷ x01`), and for `D`-side defect
//! triangles (defect edges `02`, `12`, bulk edge `01` labeled by `d`) the right action
//! (`x02 = x12 ◁ d`).
//!
//! The search fixes a gauge on a spanning forest of internal bulk edges, then assigns
//! edges depth-first with unit propagation: a triangle with two known labels forces the
//! third whenever the table determines it. Phases of bulk tetrahedra are accumulated as a
//! histogram of exponents of `ζ_L` with `L` the least common multiple of the cocycle root
//! orders, so the reduction is exact and independent of enumeration order.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use num_integer::Integer;
use num_traits::One;

use crate::algebra::FiniteGroup;
use crate::backend::{bulk_sixj, BimoduleBackend, FusionBackend};
use crate::complex::{glue_self_tracked, disjoint_union, DefectComplex, EdgeKind, TetClass};
use crate::error::{Error, Result};
use crate::{Rational, ScalarValue};

/// Named backends that regions and areas of a complex refer to.
#[derive(Clone, Debug, Default)]
pub struct Theory {
  fusion:   BTreeMap<String, FusionBackend>,
  bimodule: BTreeMap<String, BimoduleBackend>,
}

impl Theory {
  /// An empty registry.
  pub fn new() -> Self { Self::default() }

  /// Binds a fusion backend to a region name.
  pub fn with_fusion(mut self, name: &str, backend: FusionBackend) -> Self {
    self.fusion.insert(name.to_string(), backend);
    self
  }

  /// Binds a bimodule backend to an area name.
  pub fn with_bimodule(mut self, name: &str, backend: BimoduleBackend) -> Self {
    self.bimodule.insert(name.to_string(), backend);
    self
  }

  /// The fusion backend bound to `name`.
  pub fn fusion(&self, name: &str) -> Result<&FusionBackend> {
    self.fusion.get(name).ok_or_else(|| Error::UnknownBackend(format!("fusion backend {name}")))
  }

  /// The bimodule backend bound to `name`.
  pub fn bimodule(&self, name: &str) -> Result<&BimoduleBackend> {
    self.bimodule.get(name).ok_or_else(|| Error::UnknownBackend(format!("bimodule backend {name}")))
  }
}

/// A label for every edge: a group element on bulk edges, a biset element on defect edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Labeling {
  /// `labels[e]` is the simple object on edge `e`.
  pub labels: Vec<usize>,
}

/// Boundary labels and boundary morphism coefficients.
///
/// The canonical basis vector of every admissible boundary hom space has coefficient 1;
/// other rational multipliers can be set per boundary triangle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryData {
  labels:       BTreeMap<usize, usize>,
  coefficients: BTreeMap<usize, Rational>,
}

impl BoundaryData {
  /// No boundary data (for closed complexes).
  pub fn empty() -> Self { Self::default() }

  /// Boundary data from `(edge, label)` pairs.
  pub fn from_labels(labels: impl IntoIterator<Item = (usize, usize)>) -> Self {
    Self { labels: labels.into_iter().collect(), coefficients: BTreeMap::new() }
  }

  /// The restriction of a full labeling to the boundary edges of `c`.
  pub fn restrict(c: &DefectComplex, l: &Labeling) -> Self {
    Self::from_labels(c.boundary_edges().into_iter().map(|e| (e, l.labels[e])))
  }

  /// Sets the label of a boundary edge.
  pub fn with_label(mut self, e: usize, label: usize) -> Self {
    self.labels.insert(e, label);
    self
  }

  /// Scales the basis morphism on boundary triangle `f`.
  pub fn with_coefficient(mut self, f: usize, q: Rational) -> Self {
    self.coefficients.insert(f, q);
    self
  }

  /// The label of edge `e`, if set.
  pub fn label(&self, e: usize) -> Option<usize> { self.labels.get(&e).copied() }

  /// All `(edge, label)` pairs.
  pub fn labels(&self) -> impl Iterator<Item = (usize, usize)> + '_ { self.labels.iter().map(|(&e, &l)| (e, l)) }

  /// The coefficient of boundary triangle `f` (1 unless set).
  pub fn coefficient(&self, f: usize) -> Rational { self.coefficients.get(&f).cloned().unwrap_or_else(Rational::one) }
}

/// A state sum with its search statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSumResult {
  /// The state sum.
  pub value:      ScalarValue,
  /// The state sum without boundary-vertex dimension factors.
  pub rescaled:   ScalarValue,
  /// Search nodes visited (partial gauge-fixed labelings).
  pub visited:    u64,
  /// Complete admissible gauge-fixed labelings.
  pub admissible: u64,
}

/// Evaluation options.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
  /// Worker threads partitioning the search (at least 1).
  pub threads: usize,
}

impl Default for Options {
  fn default() -> Self { Self { threads: 1 } }
}

/// A compiled triangle table `x02 = T[x12][x01]` with optional inverses.
#[derive(Debug)]
pub(crate) struct Table {
  cols:    usize,
  out:     usize,
  value:   Vec<usize>,
  /// `row_inv[r * out + z]`: the unique `x01` with `T[r][x01] = z` (if every row is injective).
  row_inv: Option<Vec<usize>>,
  /// `col_inv[c * out + z]`: the unique `x12` with `T[x12][c] = z` (if every column is injective).
  col_inv: Option<Vec<usize>>,
}

const NONE: usize = usize::MAX;

impl Table {
  fn new(rows: usize, cols: usize, out: usize, f: impl Fn(usize, usize) -> usize) -> Self {
    let mut value = vec![0; rows * cols];
    for r in 0..rows {
      for c in 0..cols {
        value[r * cols + c] = f(r, c);
      }
    }
    let mut row_inv = vec![NONE; rows * out];
    let mut row_ok = true;
    let mut col_inv = vec![NONE; cols * out];
    let mut col_ok = true;
    for r in 0..rows {
      for c in 0..cols {
        let z = value[r * cols + c];
        if row_inv[r * out + z] != NONE {
          row_ok = false;
        }
        row_inv[r * out + z] = c;
        if col_inv[c * out + z] != NONE {
          col_ok = false;
        }
        col_inv[c * out + z] = r;
      }
    }
    Self {
      cols,
      out,
      value,
      row_inv: row_ok.then_some(row_inv),
      col_inv: col_ok.then_some(col_inv),
    }
  }

  #[inline]
  fn get(&self, r: usize, c: usize) -> usize { self.value[r * self.cols + c] }
}

/// Backends resolved for every region and area of a complex, with compiled tables.
pub(crate) struct Bound {
  pub(crate) region_groups: Vec<FiniteGroup>,
  pub(crate) region_fusion: Vec<FusionBackend>,
  pub(crate) domain:        Vec<usize>,
  /// Per triangle: `(e01, e12, e02, table)`.
  pub(crate) tris:          Vec<([usize; 3], Arc<Table>)>,
  /// Bulk tets with a nontrivial cocycle: `(region, [e01, e12, e23], orient)`.
  pub(crate) phased:        Vec<(usize, [usize; 3], i8)>,
  /// Least common multiple of the root orders of phased regions.
  pub(crate) root:          usize,
}

fn same_group(a: &FiniteGroup, b: &FiniteGroup) -> bool { a.order() == b.order() && a.table() == b.table() }

pub(crate) fn bind(theory: &Theory, c: &DefectComplex) -> Result<Bound> {
  let mut region_fusion = Vec::new();
  for r in c.regions() {
    region_fusion.push(theory.fusion(&r.backend)?.clone());
  }
  let region_groups: Vec<FiniteGroup> = region_fusion.iter().map(|b| b.group().clone()).collect();
  let mut area_sets = Vec::new();
  for (i, a) in c.areas().iter().enumerate() {
    let b = theory.bimodule(&a.backend)?;
    let x = b.biset();
    if !same_group(x.left_group(), &region_groups[a.c_region]) || !same_group(x.right_group(), &region_groups[a.d_region]) {
      return Err(Error::UnknownBackend(format!(
        "area {i}: biset {} acts by groups other than those of its regions",
        a.backend
      )));
    }
    area_sets.push(x.clone());
  }
  let used_areas: Vec<bool> =
    (0..c.areas().len()).map(|a| c.edges().iter().any(|e| e.kind == EdgeKind::Defect(a))).collect();
  for (r, f) in region_fusion.iter().enumerate() {
    if f.cocycle().is_trivial() {
      continue;
    }
    let touches = c.areas().iter().enumerate().any(|(a, ar)| used_areas[a] && (ar.c_region == r || ar.d_region == r));
    if touches {
      return Err(Error::UnsupportedCocycle(format!("region {r} carries a nontrivial 3-cocycle and meets a defect surface")));
    }
  }
  let domain: Vec<usize> = c
    .edges()
    .iter()
    .map(|e| match e.kind {
      EdgeKind::Bulk(r) => region_groups[r].order(),
      EdgeKind::Defect(a) => area_sets[a].size(),
    })
    .collect();
  let mut bulk_tables: BTreeMap<usize, Arc<Table>> = BTreeMap::new();
  let mut left_tables: BTreeMap<usize, Arc<Table>> = BTreeMap::new();
  let mut right_tables: BTreeMap<usize, Arc<Table>> = BTreeMap::new();
  let mut tris = Vec::with_capacity(c.triangles().len());
  for (f, t) in c.triangles().iter().enumerate() {
    let [e01, e12, e02] = t.edges;
    let kinds = [c.edges()[e01].kind, c.edges()[e12].kind, c.edges()[e02].kind];
    let table = match kinds {
      [EdgeKind::Bulk(r), EdgeKind::Bulk(_), EdgeKind::Bulk(_)] => bulk_tables
        .entry(r)
        .or_insert_with(|| {
          let g = &region_groups[r];
          Arc::new(Table::new(g.order(), g.order(), g.order(), |a, b| g.mul(a, b)))
        })
        .clone(),
      [EdgeKind::Defect(a), EdgeKind::Bulk(_), EdgeKind::Defect(_)] => left_tables
        .entry(a)
        .or_insert_with(|| {
          let x = &area_sets[a];
          Arc::new(Table::new(x.left_group().order(), x.size(), x.size(), |g, m| x.act_left(g, m)))
        })
        .clone(),
      [EdgeKind::Bulk(_), EdgeKind::Defect(a), EdgeKind::Defect(_)] => right_tables
        .entry(a)
        .or_insert_with(|| {
          let x = &area_sets[a];
          Arc::new(Table::new(x.size(), x.right_group().order(), x.size(), |m, d| x.act_right(m, d)))
        })
        .clone(),
      _ => return Err(Error::InvalidComplex(format!("triangle {f} has an unsupported defect pattern"))),
    };
    tris.push(([e01, e12, e02], table));
  }
  let mut phased = Vec::new();
  let mut root = 1usize;
  for (t, tet) in c.tets().iter().enumerate() {
    if tet.class != TetClass::Bulk {
      continue;
    }
    let fr = c.frame(t).ok_or_else(|| Error::InvalidComplex(format!("tet {t} has inconsistent faces")))?;
    let EdgeKind::Bulk(r) = c.edges()[fr.edges[0]].kind else {
      return Err(Error::InvalidComplex(format!("bulk tet {t} has a defect edge")));
    };
    let omega = region_fusion[r].cocycle();
    if !omega.is_trivial() {
      phased.push((r, [fr.edges[0], fr.edges[3], fr.edges[5]], tet.orient));
      root = root.lcm(&omega.root_order());
    }
  }
  Ok(Bound { region_groups, region_fusion, domain, tris, phased, root })
}

/// The generalized 6j symbol of tet `t` under a full labeling.
pub fn six_j(theory: &Theory, c: &DefectComplex, l: &Labeling, t: usize) -> Result<ScalarValue> {
  let bound = bind(theory, c)?;
  let fr = c.frame(t).ok_or_else(|| Error::InvalidComplex(format!("tet {t} has inconsistent faces")))?;
  for (e, &x) in fr.edges.iter().zip(fr.edges.iter().map(|&e| &l.labels[e])) {
    if x >= bound.domain[*e] {
      return Err(Error::LabelOutOfRange(format!("edge {e} label {x}")));
    }
  }
  if c.tets()[t].class == TetClass::Bulk {
    let EdgeKind::Bulk(r) = c.edges()[fr.edges[0]].kind else { unreachable!("bulk tet") };
    let labels = fr.edges.map(|e| l.labels[e]);
    return Ok(bulk_sixj(&bound.region_fusion[r], labels, c.tets()[t].orient));
  }
  let ok = c.tets()[t].faces.iter().all(|&f| {
    let ([a, b, z], table) = &bound.tris[f];
    table.get(l.labels[*b], l.labels[*a]) == l.labels[*z]
  });
  Ok(if ok { ScalarValue::one() } else { ScalarValue::zero() })
}

/// Search state shared by the depth-first workers.
struct Search<'a> {
  bound:     &'a Bound,
  edge_tris: Vec<Vec<usize>>,
  order:     Vec<usize>,
  val:       Vec<usize>,
  trail:     Vec<usize>,
  queue:     VecDeque<usize>,
  visited:   u64,
  hist:      Vec<u64>,
  /// Per phased tet: multiplier `L / N_r` and the region cocycle.
  phase_mul: Vec<usize>,
}

impl<'a> Search<'a> {
  fn set(&mut self, e: usize, x: usize) {
    self.val[e] = x;
    self.trail.push(e);
    self.queue.push_back(e);
  }

  fn undo(&mut self, mark: usize) {
    while self.trail.len() > mark {
      let e = self.trail.pop().expect("trail");
      self.val[e] = NONE;
    }
    self.queue.clear();
  }

  /// Propagates queued assignments; false on a violated triangle.
  fn propagate(&mut self) -> bool {
    while let Some(e) = self.queue.pop_front() {
      for i in 0..self.edge_tris[e].len() {
        let f = self.edge_tris[e][i];
        let ([e01, e12, e02], ref table) = self.bound.tris[f];
        let (a, b, z) = (self.val[e01], self.val[e12], self.val[e02]);
        match (a != NONE, b != NONE, z != NONE) {
          (true, true, true) => {
            if table.get(b, a) != z {
              return false;
            }
          }
          (true, true, false) => {
            let forced = table.get(b, a);
            self.set(e02, forced);
          }
          (false, true, true) => {
            if let Some(inv) = &table.row_inv {
              let forced = inv[b * table.out + z];
              if forced == NONE {
                return false;
              }
              self.set(e01, forced);
            }
          }
          (true, false, true) => {
            if let Some(inv) = &table.col_inv {
              let forced = inv[a * table.out + z];
              if forced == NONE {
                return false;
              }
              self.set(e12, forced);
            }
          }
          _ => {}
        }
      }
    }
    true
  }

  fn leaf(&mut self) {
    let mut k = 0usize;
    let root = self.bound.root;
    for (i, &(r, [e01, e12, e23], orient)) in self.bound.phased.iter().enumerate() {
      let omega = self.bound.region_fusion[r].cocycle();
      let e = omega.exponent(self.val[e23], self.val[e12], self.val[e01]) * self.phase_mul[i] % root;
      k = if orient >= 0 { (k + e) % root } else { (k + root - e) % root };
    }
    self.hist[k] += 1;
  }

  fn dfs(&mut self, depth: usize) {
    self.visited += 1;
    let mut d = depth;
    while d < self.order.len() && self.val[self.order[d]] != NONE {
      d += 1;
    }
    if d == self.order.len() {
      self.leaf();
      return;
    }
    let e = self.order[d];
    for x in 0..self.bound.domain[e] {
      let mark = self.trail.len();
      self.set(e, x);
      if self.propagate() {
        self.dfs(d + 1);
      }
      self.undo(mark);
    }
  }
}

/// Gauge-fixing spanning forest: per region, breadth-first from the boundary vertices
/// (which are never gauged) and then from arbitrary roots, along internal bulk edges.
/// Returns the tree edges.
pub(crate) fn gauge_tree(c: &DefectComplex) -> Vec<usize> {
  let nv = c.num_vertices();
  let mut adj = vec![Vec::new(); nv];
  for (e, edge) in c.edges().iter().enumerate() {
    if matches!(edge.kind, EdgeKind::Bulk(_)) && edge.tail != edge.head && !c.is_boundary_edge(e) {
      adj[edge.tail].push((edge.head, e));
      adj[edge.head].push((edge.tail, e));
    }
  }
  // Grow from the boundary vertices as one multi-source search.
  let mut seen = vec![false; nv];
  let mut tree = Vec::new();
  let mut queue: VecDeque<usize> = c.boundary_vertices().into_iter().collect();
  for &v in &queue {
    seen[v] = true;
  }
  let grow = |queue: &mut VecDeque<usize>, seen: &mut Vec<bool>, tree: &mut Vec<usize>| {
    while let Some(v) = queue.pop_front() {
      for &(w, e) in &adj[v] {
        if !seen[w] {
          seen[w] = true;
          tree.push(e);
          queue.push_back(w);
        }
      }
    }
  };
  grow(&mut queue, &mut seen, &mut tree);
  for v in 0..nv {
    if !seen[v] {
      seen[v] = true;
      queue.push_back(v);
      grow(&mut queue, &mut seen, &mut tree);
    }
  }
  tree
}

/// Static variable order: edges in breadth-first tet order, so triangles close early.
fn search_order(c: &DefectComplex) -> Vec<usize> {
  let nt = c.tets().len();
  let mut seen_t = vec![false; nt];
  let mut seen_e = vec![false; c.edges().len()];
  let mut order = Vec::new();
  for s in 0..nt {
    if seen_t[s] {
      continue;
    }
    seen_t[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(t) = queue.pop_front() {
      if let Some(fr) = c.frame(t) {
        for &e in &fr.edges {
          if !seen_e[e] {
            seen_e[e] = true;
            order.push(e);
          }
        }
      }
      for &f in &c.tets()[t].faces {
        for &(u, _) in c.triangle_tets(f) {
          if !seen_t[u] {
            seen_t[u] = true;
            queue.push_back(u);
          }
        }
      }
    }
  }
  for e in 0..c.edges().len() {
    if !seen_e[e] {
      order.push(e);
    }
  }
  order
}

/// Sums `hist[k] · ζ_root^k`.
pub(crate) fn histogram_value(hist: &[u64], root: usize) -> ScalarValue {
  if root == 1 {
    return ScalarValue::integer(hist[0] as i64);
  }
  hist
    .iter()
    .enumerate()
    .filter(|(_, &n)| n != 0)
    .map(|(k, &n)| ScalarValue::zeta(root, k as i64).scale(&Rational::from_integer(n.into())))
    .sum()
}

/// Checks the boundary data against `c`.
fn check_boundary(c: &DefectComplex, bound: &Bound, b: &BoundaryData) -> Result<()> {
  for e in c.boundary_edges() {
    match b.label(e) {
      None => return Err(Error::IncompleteBoundary(format!("boundary edge {e} has no label"))),
      Some(x) if x >= bound.domain[e] => return Err(Error::LabelOutOfRange(format!("edge {e} label {x}"))),
      Some(_) => {}
    }
  }
  for (e, _) in b.labels() {
    if e >= c.edges().len() || !c.is_boundary_edge(e) {
      return Err(Error::IncompleteBoundary(format!("label given for edge {e}, which is not a boundary edge")));
    }
  }
  for &f in b.coefficients.keys() {
    if f >= c.triangles().len() || !c.is_boundary_triangle(f) {
      return Err(Error::IncompleteBoundary(format!("coefficient given for triangle {f}, which is not a boundary triangle")));
    }
  }
  Ok(())
}

/// The state sum with default options.
pub fn state_sum(theory: &Theory, c: &DefectComplex, b: &BoundaryData) -> Result<StateSumResult> {
  state_sum_with(theory, c, b, Options::default())
}

/// The state sum `Π_r |G_r|^{-(n_int + n_bdry/2)} · Σ_l Π_t 6j(t, l) · Π_f b_f`.
pub fn state_sum_with(theory: &Theory, c: &DefectComplex, b: &BoundaryData, opts: Options) -> Result<StateSumResult> {
  let report = crate::complex::validate(c);
  if !report.is_ok() {
    return Err(Error::InvalidComplex(report.to_string().trim().to_string()));
  }
  let bound = bind(theory, c)?;
  check_boundary(c, &bound, b)?;
  let ne = c.edges().len();
  let mut edge_tris = vec![Vec::new(); ne];
  for (f, (es, _)) in bound.tris.iter().enumerate() {
    for &e in es {
      if !edge_tris[e].contains(&f) {
        edge_tris[e].push(f);
      }
    }
  }
  let tree = gauge_tree(c);
  let phase_mul: Vec<usize> =
    bound.phased.iter().map(|&(r, _, _)| bound.root / bound.region_fusion[r].cocycle().root_order()).collect();
  let mut base = Search {
    bound: &bound,
    edge_tris,
    order: search_order(c),
    val: vec![NONE; ne],
    trail: Vec::new(),
    queue: VecDeque::new(),
    visited: 0,
    hist: vec![0; bound.root],
    phase_mul,
  };
  let mut consistent = true;
  for (e, x) in b.labels() {
    base.set(e, x);
  }
  for &e in &tree {
    let EdgeKind::Bulk(r) = c.edges()[e].kind else { unreachable!("bulk tree") };
    base.set(e, bound.region_groups[r].identity());
  }
  consistent &= base.propagate();
  base.trail.clear();
  let (hist, visited) = if !consistent {
    (vec![0; bound.root], 1)
  } else {
    run_search(base, opts.threads.max(1))
  };
  let admissible: u64 = hist.iter().sum();
  let sum = histogram_value(&hist, bound.root);
  // Normalisation.
  let mut factor = Rational::one();
  let mut sqrt_part = ScalarValue::one();
  let mut tree_count = vec![0i64; c.regions().len()];
  for &e in &tree {
    if let EdgeKind::Bulk(r) = c.edges()[e].kind {
      tree_count[r] += 1;
    }
  }
  for (r, g) in bound.region_groups.iter().enumerate() {
    let n = g.order() as i64;
    let internal = (0..c.num_vertices()).filter(|&v| c.vertex_regions()[v] == r && !c.is_boundary_vertex(v)).count() as i64;
    let boundary = (0..c.num_vertices()).filter(|&v| c.vertex_regions()[v] == r && c.is_boundary_vertex(v)).count() as i64;
    factor *= rational_pow(n, tree_count[r] - internal);
    if boundary > 0 && n > 1 {
      sqrt_part = &sqrt_part * &ScalarValue::sqrt_pow(n as u64, -boundary);
    }
  }
  for f in c.boundary_triangles() {
    factor *= b.coefficient(f);
  }
  let rescaled = sum.scale(&factor);
  let value = &rescaled * &sqrt_part;
  Ok(StateSumResult { value, rescaled, visited, admissible })
}

fn rational_pow(n: i64, e: i64) -> Rational {
  let p = Rational::from_integer(n.into());
  if e >= 0 {
    num_traits::pow(p, e as usize)
  } else {
    Rational::one() / num_traits::pow(p, (-e) as usize)
  }
}

/// Runs the search, splitting the first free variable's values across threads.
fn run_search(mut base: Search<'_>, threads: usize) -> (Vec<u64>, u64) {
  let first = (0..base.order.len()).find(|&d| base.val[base.order[d]] == NONE);
  let Some(d0) = first else {
    base.leaf();
    return (base.hist, 1);
  };
  if threads == 1 {
    base.dfs(0);
    return (base.hist, base.visited);
  }
  let e0 = base.order[d0];
  let width = base.bound.domain[e0];
  let results: Vec<(Vec<u64>, u64)> = std::thread::scope(|s| {
    let handles: Vec<_> = (0..threads.min(width))
      .map(|w| {
        let mut local = Search {
          bound:     base.bound,
          edge_tris: base.edge_tris.clone(),
          order:     base.order.clone(),
          val:       base.val.clone(),
          trail:     Vec::new(),
          queue:     VecDeque::new(),
          visited:   0,
          hist:      vec![0; base.bound.root],
          phase_mul: base.phase_mul.clone(),
        };
        s.spawn(move || {
          for x in (w..width).step_by(threads) {
            local.visited += 1;
            let mark = local.trail.len();
            local.set(e0, x);
            if local.propagate() {
              local.dfs(d0 + 1);
            }
            local.undo(mark);
          }
          (local.hist, local.visited)
        })
      })
      .collect();
    handles.into_iter().map(|h| h.join().expect("worker")).collect()
  });
  let mut hist = vec![0; base.bound.root];
  let mut visited = 1;
  for (h, v) in results {
    for (a, b) in hist.iter_mut().zip(h) {
      *a += b;
    }
    visited += v;
  }
  (hist, visited)
}

/// The state sum of `glue(c1, c2, matching)` computed as a sum over interface labelings
/// of products of the state sums of the two pieces. `b` is boundary data on the glued
/// complex; interface vertices that stay on the boundary get their dimension factor
/// corrected.
pub fn glued_state_sum(
  theory: &Theory,
  c1: &DefectComplex,
  c2: &DefectComplex,
  matching: &[(usize, usize)],
  b: &BoundaryData,
) -> Result<ScalarValue> {
  let u = disjoint_union(c1, c2);
  let nf1 = c1.triangles().len();
  let shifted: Vec<(usize, usize)> = matching.iter().map(|&(x, y)| (x, y + nf1)).collect();
  let (glued, vmap, emap) = glue_self_tracked(&u, &shifted)?;
  let bound = bind(theory, &glued)?;
  check_boundary(&glued, &bound, b)?;
  let ne1 = c1.edges().len();
  // Interface edge classes that are internal in the glued complex.
  let mut free: Vec<usize> = Vec::new();
  for &(x, y) in &shifted {
    for f in [x, y] {
      for &e in &u.triangles()[f].edges {
        let g = emap[e];
        if !glued.is_boundary_edge(g) && !free.contains(&g) {
          free.push(g);
        }
      }
    }
  }
  free.sort_unstable();
  // Dimension correction for interface vertices that remain on the boundary.
  let mut correction = ScalarValue::one();
  for v in 0..glued.num_vertices() {
    if !glued.is_boundary_vertex(v) {
      continue;
    }
    let pieces = (0..u.num_vertices()).filter(|&w| vmap[w] == v && u.is_boundary_vertex(w)).count() as i64;
    let n = bound.region_groups[glued.vertex_regions()[v]].order() as u64;
    if pieces > 1 && n > 1 {
      correction = &correction * &ScalarValue::sqrt_pow(n, pieces - 1);
    }
  }
  let mut total = ScalarValue::zero();
  let mut labels = vec![0usize; free.len()];
  let split = |labels: &[usize]| -> (BoundaryData, BoundaryData) {
    let value_of = |g: usize| -> Option<usize> {
      b.label(g).or_else(|| free.iter().position(|&x| x == g).map(|i| labels[i]))
    };
    let b1 = BoundaryData::from_labels(c1.boundary_edges().into_iter().filter_map(|e| value_of(emap[e]).map(|x| (e, x))));
    let b2 =
      BoundaryData::from_labels(c2.boundary_edges().into_iter().filter_map(|e| value_of(emap[e + ne1]).map(|x| (e, x))));
    (b1, b2)
  };
  loop {
    let (b1, b2) = split(&labels);
    let z1 = state_sum(theory, c1, &b1)?.value;
    if !z1.is_zero() {
      let z2 = state_sum(theory, c2, &b2)?.value;
      total = &total + &(&z1 * &z2);
    }
    // Odometer over the free interface labels.
    let mut i = 0;
    loop {
      if i == free.len() {
        let coeff: Rational = glued.boundary_triangles().iter().map(|&f| b.coefficient(f)).product();
        return Ok((&total * &correction).scale(&coeff));
      }
      labels[i] += 1;
      if labels[i] < bound.domain[free[i]] {
        break;
      }
      labels[i] = 0;
      i += 1;
    }
  }
}
