//! Brute-force reference implementations.
//!
//! Nothing here shares evaluation code with [`statesum`](crate::statesum): the state
//! sum is a literal loop over every labeling of the internal edges, with admissibility
//! and phases recomputed from the definitions, and the group-theoretic counts are plain
//! enumerations.

use std::collections::BTreeMap;

use num_traits::One;

use crate::algebra::{BiSet, FiniteGroup};
use crate::backend::FusionBackend;
use crate::complex::{validate, DefectComplex, EdgeKind, TET_EDGES};
use crate::error::{Error, Result};
use crate::statesum::{BoundaryData, Theory};
use crate::{Rational, ScalarValue};

/// Default cap on the number of labelings [`brute_state_sum`] will enumerate.
pub const DEFAULT_CAP: u128 = 100_000_000;

/// The state sum by enumerating every labeling of the internal edges, with the
/// default cap.
pub fn brute_state_sum(theory: &Theory, c: &DefectComplex, b: &BoundaryData) -> Result<ScalarValue> {
  brute_state_sum_capped(theory, c, b, DEFAULT_CAP)
}

/// Per-edge label domain and the data needed to check one triangle.
enum Face {
  /// `l(02) = l(12)·l(01)` in a group.
  Bulk { edges: [usize; 3], group: FiniteGroup },
  /// `x(02) = c ▷ x(01)` with `c = l(12)`.
  Left { x01: usize, c: usize, x02: usize, area: usize },
  /// `x(02) = x(12) ◁ d` with `d = l(01)`.
  Right { d: usize, x12: usize, x02: usize, area: usize },
}

impl Face {
  fn edges(&self) -> [usize; 3] {
    match *self {
      Face::Bulk { edges, .. } => edges,
      Face::Left { x01, c, x02, .. } => [x01, c, x02],
      Face::Right { d, x12, x02, .. } => [d, x12, x02],
    }
  }

  fn holds(&self, l: &[usize], bisets: &[BiSet]) -> bool {
    match self {
      Face::Bulk { edges: [a, b, c], group } => l[*c] == group.mul(l[*b], l[*a]),
      Face::Left { x01, c, x02, area } => l[*x02] == bisets[*area].act_left(l[*c], l[*x01]),
      Face::Right { d, x12, x02, area } => l[*x02] == bisets[*area].act_right(l[*x12], l[*d]),
    }
  }
}

fn faces(c: &DefectComplex, groups: &[FusionBackend]) -> Vec<Face> {
  let edges = c.edges();
  c.triangles()
    .iter()
    .map(|t| {
      let [e01, e12, e02] = t.edges;
      match (edges[e01].kind, edges[e12].kind, edges[e02].kind) {
        (EdgeKind::Defect(a), EdgeKind::Bulk(_), EdgeKind::Defect(_)) => Face::Left { x01: e01, c: e12, x02: e02, area: a },
        (EdgeKind::Bulk(_), EdgeKind::Defect(a), EdgeKind::Defect(_)) => Face::Right { d: e01, x12: e12, x02: e02, area: a },
        (EdgeKind::Bulk(r), _, _) => Face::Bulk { edges: t.edges, group: groups[r].group().clone() },
        _ => unreachable!("validated triangle"),
      }
    })
    .collect()
}

/// Every labeling of the boundary edges under which all boundary triangles are
/// admissible, in lexicographic order of the boundary edge ids. Fails with
/// [`Error::TooLarge`] once more than `cap` labelings are found.
pub fn admissible_boundaries(theory: &Theory, c: &DefectComplex, cap: usize) -> Result<Vec<BoundaryData>> {
  let report = validate(c);
  if !report.is_ok() {
    return Err(Error::InvalidComplex(report.to_string().trim().to_string()));
  }
  let groups: Vec<FusionBackend> = c.regions().iter().map(|r| theory.fusion(&r.backend).cloned()).collect::<Result<_>>()?;
  let bisets: Vec<BiSet> =
    c.areas().iter().map(|a| theory.bimodule(&a.backend).map(|b| b.biset().clone())).collect::<Result<_>>()?;
  let order = c.boundary_edges();
  let domain: Vec<usize> = order
    .iter()
    .map(|&e| match c.edges()[e].kind {
      EdgeKind::Bulk(r) => groups[r].group().order(),
      EdgeKind::Defect(a) => bisets[a].size(),
    })
    .collect();
  let mut position = vec![usize::MAX; c.edges().len()];
  for (i, &e) in order.iter().enumerate() {
    position[e] = i;
  }
  // Boundary triangles grouped by the search depth at which they are complete.
  let all = faces(c, &groups);
  let mut completes: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
  for f in c.boundary_triangles() {
    let depth = all[f].edges().iter().map(|&e| position[e]).max().expect("three edges");
    completes[depth].push(f);
  }
  let mut labels = vec![0usize; c.edges().len()];
  let mut out = Vec::new();
  let mut stack = vec![0usize];
  // Iterative depth-first search; `stack[i]` is the next value to try at depth `i`.
  while let Some(&next) = stack.last() {
    let depth = stack.len() - 1;
    if depth == order.len() {
      if out.len() == cap {
        return Err(Error::TooLarge { count: cap as u128 + 1, cap: cap as u128 });
      }
      out.push(BoundaryData::from_labels(order.iter().map(|&e| (e, labels[e]))));
      stack.pop();
      continue;
    }
    if next == domain[depth] {
      stack.pop();
      continue;
    }
    *stack.last_mut().unwrap() += 1;
    labels[order[depth]] = next;
    if completes[depth].iter().all(|&f| all[f].holds(&labels, &bisets)) {
      stack.push(0);
    }
  }
  Ok(out)
}

/// [`brute_state_sum`] with an explicit cap on the number of labelings.
pub fn brute_state_sum_capped(theory: &Theory, c: &DefectComplex, b: &BoundaryData, cap: u128) -> Result<ScalarValue> {
  let report = validate(c);
  if !report.is_ok() {
    return Err(Error::InvalidComplex(report.to_string().trim().to_string()));
  }
  let edges = c.edges();
  let mut groups = Vec::new();
  for r in c.regions() {
    groups.push(theory.fusion(&r.backend)?.clone());
  }
  let mut bisets = Vec::new();
  for a in c.areas() {
    bisets.push(theory.bimodule(&a.backend)?.biset().clone());
  }
  let domain: Vec<usize> = edges
    .iter()
    .map(|e| match e.kind {
      EdgeKind::Bulk(r) => groups[r].group().order(),
      EdgeKind::Defect(a) => bisets[a].size(),
    })
    .collect();
  // Fixed boundary labels, free internal edges.
  let mut labels = vec![0usize; edges.len()];
  for e in c.boundary_edges() {
    let x = b.label(e).ok_or_else(|| Error::IncompleteBoundary(format!("boundary edge {e} has no label")))?;
    if x >= domain[e] {
      return Err(Error::LabelOutOfRange(format!("edge {e} label {x}")));
    }
    labels[e] = x;
  }
  for (e, _) in b.labels() {
    if e >= edges.len() || !c.is_boundary_edge(e) {
      return Err(Error::IncompleteBoundary(format!("label given for edge {e}, which is not a boundary edge")));
    }
  }
  let free: Vec<usize> = (0..edges.len()).filter(|&e| !c.is_boundary_edge(e)).collect();
  let total: u128 = free.iter().try_fold(1u128, |acc, &e| acc.checked_mul(domain[e] as u128)).unwrap_or(u128::MAX);
  if total > cap {
    return Err(Error::TooLarge { count: total, cap });
  }
  let faces = faces(c, &groups);
  // Bulk tetrahedra with a twisted region contribute phases.
  let mut phased = Vec::new();
  for (t, tet) in c.tets().iter().enumerate() {
    let fr = c.frame(t).expect("validated tet");
    if let EdgeKind::Bulk(r) = edges[fr.edges[0]].kind {
      if fr.edges.iter().all(|&e| edges[e].kind == EdgeKind::Bulk(r)) && !groups[r].cocycle().is_trivial() {
        let pick = |i: usize, j: usize| fr.edges[TET_EDGES.iter().position(|&p| p == (i, j)).expect("pair")];
        phased.push((r, [pick(2, 3), pick(1, 2), pick(0, 1)], tet.orient));
      }
    }
  }
  let root = phased.iter().map(|&(r, _, _)| groups[r].cocycle().root_order()).fold(1, num_integer::lcm);
  let mut histogram: BTreeMap<i64, u64> = BTreeMap::new();
  let admissible = |l: &[usize]| faces.iter().all(|f| f.holds(l, &bisets));
  loop {
    if admissible(&labels) {
      let mut k = 0i64;
      for &(r, [a, b, c], orient) in &phased {
        let w = groups[r].cocycle();
        let scale = (root / w.root_order()) as i64;
        k += orient as i64 * scale * w.exponent(labels[a], labels[b], labels[c]) as i64;
      }
      *histogram.entry(k.rem_euclid(root as i64)).or_insert(0) += 1;
    }
    // Odometer increment over the free edges.
    let mut i = 0;
    loop {
      if i == free.len() {
        return Ok(finish(c, &groups_orders(&groups), b, root, &histogram));
      }
      let e = free[i];
      labels[e] += 1;
      if labels[e] < domain[e] {
        break;
      }
      labels[e] = 0;
      i += 1;
    }
  }
}

fn groups_orders(groups: &[FusionBackend]) -> Vec<u64> { groups.iter().map(|g| g.group().order() as u64).collect() }

fn finish(c: &DefectComplex, orders: &[u64], b: &BoundaryData, root: usize, histogram: &BTreeMap<i64, u64>) -> ScalarValue {
  let mut sum = ScalarValue::zero();
  for (&k, &n) in histogram {
    sum = &sum + &ScalarValue::zeta(root, k).scale(&Rational::from_integer(n.into()));
  }
  let mut factor = Rational::one();
  let mut result = sum;
  for v in 0..c.num_vertices() {
    let n = orders[c.vertex_regions()[v]];
    if c.is_boundary_vertex(v) {
      result = &result * &ScalarValue::sqrt_pow(n, -1);
    } else {
      factor /= Rational::from_integer(n.into());
    }
  }
  for f in c.boundary_triangles() {
    factor *= b.coefficient(f);
  }
  result.scale(&factor)
}

/// The number of flat `G`-labelings of the edges of a closed defect-free complex
/// divided by `|G|^{|V|}`. Labelings are enumerated edge by edge, rejecting a partial
/// labeling as soon as one of its completed triangles is not flat.
pub fn flat_count(c: &DefectComplex, group: &FiniteGroup) -> Result<Rational> {
  if !c.is_closed() || c.has_defects() {
    return Err(Error::InvalidComplex("flat_count needs a closed complex without defects".into()));
  }
  let tris: Vec<[usize; 3]> = c.triangles().iter().map(|t| t.edges).collect();
  let ne = c.edges().len();
  // The triangles completed when edge e is assigned (edges assigned in id order).
  let mut completes = vec![Vec::new(); ne];
  for t in &tris {
    completes[*t.iter().max().expect("three edges")].push(*t);
  }
  let mut labels = vec![0usize; ne];
  let count = count_flat(group, &completes, &mut labels, 0);
  Ok(Rational::new(count.into(), (group.order() as u64).pow(c.num_vertices() as u32).into()))
}

fn count_flat(group: &FiniteGroup, completes: &[Vec<[usize; 3]>], labels: &mut [usize], e: usize) -> u64 {
  if e == labels.len() {
    return 1;
  }
  let mut total = 0;
  for x in 0..group.order() {
    labels[e] = x;
    if completes[e].iter().all(|&[a, b, c]| labels[c] == group.mul(labels[b], labels[a])) {
      total += count_flat(group, completes, labels, e + 1);
    }
  }
  total
}

/// A finite group presentation; letters are `±(k + 1)` for generator `k` or its
/// inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
  /// Number of generators.
  pub generators: usize,
  /// Relator words.
  pub relators:   Vec<Vec<i64>>,
}

impl Presentation {
  /// Parses `gens | relators`, e.g. `x, y | xyxYXY`: generators are single lowercase
  /// letters, uppercase letters denote inverses, relators are separated by commas.
  pub fn parse(text: &str) -> Result<Self> {
    let bad = |m: &str| Error::SyntaxError { line: 1, message: m.to_string() };
    let (gens, rels) = text.split_once('|').unwrap_or((text, ""));
    let names: Vec<char> = gens
      .split(',')
      .map(str::trim)
      .filter(|s| !s.is_empty())
      .map(|s| {
        let mut it = s.chars();
        match (it.next(), it.next()) {
          (Some(ch), None) if ch.is_ascii_lowercase() => Ok(ch),
          _ => Err(bad(&format!("generator {s:?} is not a lowercase letter"))),
        }
      })
      .collect::<Result<_>>()?;
    let mut relators = Vec::new();
    for word in rels.split(',').map(str::trim).filter(|s| !s.is_empty()) {
      let mut w = Vec::new();
      for ch in word.chars().filter(|c| !c.is_whitespace()) {
        let k = names
          .iter()
          .position(|&n| n == ch.to_ascii_lowercase())
          .ok_or_else(|| bad(&format!("unknown generator {ch:?}")))?;
        w.push(if ch.is_ascii_uppercase() { -(k as i64 + 1) } else { k as i64 + 1 });
      }
      relators.push(w);
    }
    Ok(Self { generators: names.len(), relators })
  }
}

/// Counts homomorphisms from a presented group into `group` (tuples of images
/// satisfying every relator) and their conjugacy classes (orbits under simultaneous
/// conjugation).
pub fn presentation_hom_count(p: &Presentation, group: &FiniteGroup) -> (u64, u64) {
  let n = group.order();
  let k = p.generators;
  let eval = |images: &[usize], w: &[i64]| {
    w.iter().fold(group.identity(), |acc, &letter| {
      let g = images[(letter.unsigned_abs() - 1) as usize];
      group.mul(acc, if letter > 0 { g } else { group.inv(g) })
    })
  };
  let mut homs = Vec::new();
  let mut images = vec![0usize; k];
  'outer: loop {
    if p.relators.iter().all(|w| eval(&images, w) == group.identity()) {
      homs.push(images.clone());
    }
    for i in 0..k {
      images[i] += 1;
      if images[i] < n {
        continue 'outer;
      }
      images[i] = 0;
    }
    break;
  }
  let index: BTreeMap<Vec<usize>, usize> = homs.iter().enumerate().map(|(i, h)| (h.clone(), i)).collect();
  let mut seen = vec![false; homs.len()];
  let mut classes = 0;
  for i in 0..homs.len() {
    if seen[i] {
      continue;
    }
    classes += 1;
    for g in 0..n {
      let conj: Vec<usize> = homs[i].iter().map(|&x| group.mul(group.mul(g, x), group.inv(g))).collect();
      seen[index[&conj]] = true;
    }
  }
  (homs.len() as u64, classes)
}

/// The Wirtinger presentation of a knot diagram given as planar-diagram crossings, one
/// `X a b c d` per line (also accepted: `X[a,b,c,d]`). In each crossing `a → c` is the
/// under-strand and `b, d` the over-strand; edge labels run `1..=2n` along the knot.
/// One generator per arc, one relator per crossing; no crossings gives `⟨x | ⟩`.
pub fn wirtinger(pd: &str) -> Result<Presentation> {
  let mut crossings = Vec::new();
  for (lineno, line) in pd.lines().enumerate() {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
      continue;
    }
    for item in line.split_inclusive(']').map(str::trim).filter(|s| !s.is_empty()) {
      let body = item.strip_prefix('X').ok_or_else(|| Error::MalformedPD(format!("line {}: expected X", lineno + 1)))?;
      let nums: Vec<usize> = body
        .split(|ch: char| ch == ',' || ch == '[' || ch == ']' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::MalformedPD(format!("line {}: bad number {s:?}", lineno + 1))))
        .collect::<Result<_>>()?;
      let q: [usize; 4] = nums.try_into().map_err(|_| Error::MalformedPD(format!("line {}: need four labels", lineno + 1)))?;
      crossings.push(q);
    }
  }
  if crossings.is_empty() {
    return Ok(Presentation { generators: 1, relators: Vec::new() });
  }
  let m = 2 * crossings.len();
  let mut uses = vec![0usize; m + 1];
  for q in &crossings {
    for &x in q {
      if x == 0 || x > m {
        return Err(Error::MalformedPD(format!("label {x} outside 1..={m}")));
      }
      uses[x] += 1;
    }
  }
  if let Some(x) = (1..=m).find(|&x| uses[x] != 2) {
    return Err(Error::MalformedPD(format!("label {x} appears {} times (dangling arc)", uses[x])));
  }
  let next = |x: usize| x % m + 1;
  // Arcs: over-strand edges continue through a crossing.
  let mut parent: Vec<usize> = (0..=m).collect();
  fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
      r = p[r];
    }
    p[x] = r;
    r
  }
  for &[a, b, c, d] in &crossings {
    if c != next(a) {
      return Err(Error::MalformedPD(format!("under-strand {a} → {c} is not consecutive")));
    }
    if b != next(d) && d != next(b) {
      return Err(Error::MalformedPD(format!("over-strand {b}, {d} is not consecutive")));
    }
    let (rb, rd) = (find(&mut parent, b), find(&mut parent, d));
    parent[rb] = rd;
  }
  let mut arc = vec![usize::MAX; m + 1];
  let mut count = 0;
  for x in 1..=m {
    let r = find(&mut parent, x);
    if arc[r] == usize::MAX {
      arc[r] = count;
      count += 1;
    }
    arc[x] = arc[r];
  }
  let letter = |x: usize, inverse: bool| {
    let g = arc[x] as i64 + 1;
    if inverse {
      -g
    } else {
      g
    }
  };
  let relators = crossings
    .iter()
    .map(|&[a, b, c, d]| {
      // Positive when the over-strand runs d → b.
      let positive = b == next(d);
      // x_out = x_over^{±1} · x_in · x_over^{∓1}, written as a relator.
      vec![letter(c, true), letter(b, !positive), letter(a, false), letter(b, positive)]
    })
    .collect();
  Ok(Presentation { generators: count, relators })
}

/// The standard three-crossing trefoil diagram.
pub const TREFOIL_PD: &str = "X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2\n";
