//! Finite groups, normalized 3-cocycles, and transitive bisets.
//!
//! Groups are closed multiplication tables over dense indices `0..order`; products and
//! inverses are table lookups. A [`BiSet`] is a finite set with commuting left `G`- and
//! right `G'`-actions that is transitive under `G × G'^op`.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
  name:     String,
  order:    usize,
  mul:      Vec<usize>,
  identity: usize,
  inv:      Vec<usize>,
}

impl FiniteGroup {
  /// Builds a group from a row-major `order × order` table, verifying the group axioms.
  pub fn from_table(name: impl Into<String>, order: usize, mul: Vec<usize>) -> Result<Self> {
    if order == 0 {
      return Err(Error::NoIdentity);
    }
    if mul.len() != order * order {
      return Err(Error::LabelOutOfRange(format!(
        "table has {} entries, expected {}",
        mul.len(),
        order * order
      )));
    }
    if let Some(&bad) = mul.iter().find(|&&x| x >= order) {
      return Err(Error::LabelOutOfRange(format!("table entry {bad} >= order {order}")));
    }
    let m = |a: usize, b: usize| mul[a * order + b];
    for a in 0..order {
      for b in 0..order {
        for c in 0..order {
          if m(m(a, b), c) != m(a, m(b, c)) {
            return Err(Error::NonAssociative(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
          }
        }
      }
    }
    let identity = (0..order)
      .find(|&e| (0..order).all(|a| m(e, a) == a && m(a, e) == a))
      .ok_or(Error::NoIdentity)?;
    let mut inv = Vec::with_capacity(order);
    for a in 0..order {
      let b = (0..order)
        .find(|&b| m(a, b) == identity && m(b, a) == identity)
        .ok_or(Error::NoInverse(a))?;
      inv.push(b);
    }
    Ok(Self { name: name.into(), order, mul, identity, inv })
  }

  /// The trivial group.
  pub fn trivial() -> Self { Self::cyclic(1) }

  /// The cyclic group `Z/n`, element `k` standing for `k mod n`.
  pub fn cyclic(n: usize) -> Self {
    let n = n.max(1);
    let mul = (0..n * n).map(|i| (i / n + i % n) % n).collect();
    let inv = (0..n).map(|a| (n - a) % n).collect();
    Self { name: format!("Z/{n}"), order: n, mul, identity: 0, inv }
  }

  /// The symmetric group on `n` letters; permutations in lexicographic order, composed as
  /// functions (`(σ·τ)(i) = σ(τ(i))`). Element 0 is the identity.
  pub fn symmetric(n: usize) -> Self {
    let perms = permutations(n.max(1));
    let index = |p: &[usize]| perms.iter().position(|q| q.as_slice() == p).expect("closed");
    let order = perms.len();
    let mut mul = vec![0; order * order];
    for (a, pa) in perms.iter().enumerate() {
      for (b, pb) in perms.iter().enumerate() {
        let prod: Vec<usize> = (0..pa.len()).map(|i| pa[pb[i]]).collect();
        mul[a * order + b] = index(&prod);
      }
    }
    let mut g = Self::from_table(format!("S{n}"), order, mul).expect("symmetric group axioms");
    g.name = format!("S{n}");
    g
  }

  /// The dihedral group of order `2n` (symmetries of the `n`-gon); `r^k s^e` has index
  /// `k + n e`.
  pub fn dihedral(n: usize) -> Self {
    let n = n.max(1);
    let order = 2 * n;
    let mut mul = vec![0; order * order];
    for a in 0..order {
      for b in 0..order {
        let (ka, ea) = (a % n, a / n);
        let (kb, eb) = (b % n, b / n);
        let k = if ea == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
        mul[a * order + b] = k + n * ((ea + eb) % 2);
      }
    }
    Self::from_table(format!("D{n}"), order, mul).expect("dihedral group axioms")
  }

  /// Parses a group descriptor: `Z/n`, `S n`, `D n` (spaces optional) or `table:<path>`
  /// where the file holds `n` followed by the `n²` table entries.
  pub fn from_descriptor(desc: &str) -> Result<Self> {
    let d = desc.trim();
    if let Some(path) = d.strip_prefix("table:") {
      return Self::from_table_file(Path::new(path.trim()));
    }
    let compact: String = d.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::SyntaxError { line: 1, message: format!("unknown group descriptor '{desc}'") };
    let number = |s: &str| s.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(bad);
    if let Some(rest) = compact.strip_prefix("Z/") {
      Ok(Self::cyclic(number(rest)?))
    } else if let Some(rest) = compact.strip_prefix('Z') {
      Ok(Self::cyclic(number(rest)?))
    } else if let Some(rest) = compact.strip_prefix('S') {
      Ok(Self::symmetric(number(rest)?))
    } else if let Some(rest) = compact.strip_prefix('D') {
      Ok(Self::dihedral(number(rest)?))
    } else if compact == "1" || compact.eq_ignore_ascii_case("trivial") {
      Ok(Self::trivial())
    } else {
      Err(bad())
    }
  }

  fn from_table_file(path: &Path) -> Result<Self> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut nums = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
      let line = line.split('#').next().unwrap_or("");
      for tok in line.split_whitespace() {
        nums.push(tok.parse::<usize>().map_err(|_| Error::SyntaxError {
          line:    lineno + 1,
          message: format!("expected a non-negative integer, found '{tok}'"),
        })?);
      }
    }
    let (&n, rest) = nums.split_first().ok_or(Error::SyntaxError { line: 1, message: "empty table file".into() })?;
    Self::from_table(format!("table:{}", path.display()), n, rest.to_vec())
  }

  /// Descriptive name (e.g. `S3`).
  pub fn name(&self) -> &str { &self.name }

  /// Number of elements.
  pub fn order(&self) -> usize { self.order }

  /// Index of the identity element.
  pub fn identity(&self) -> usize { self.identity }

  /// Product `a·b`.
  #[inline]
  pub fn mul(&self, a: usize, b: usize) -> usize { self.mul[a * self.order + b] }

  /// Inverse `a⁻¹`.
  #[inline]
  pub fn inv(&self, a: usize) -> usize { self.inv[a] }

  /// The raw row-major multiplication table.
  pub fn table(&self) -> &[usize] { &self.mul }

  /// Whether all elements commute.
  pub fn is_abelian(&self) -> bool {
    (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
  }

  /// Orbits of the conjugation action, each sorted, ordered by smallest element.
  pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
    let mut seen = vec![false; self.order];
    let mut classes = Vec::new();
    for a in 0..self.order {
      if seen[a] {
        continue;
      }
      let class: BTreeSet<usize> =
        (0..self.order).map(|g| self.mul(self.mul(g, a), self.inv(g))).collect();
      for &c in &class {
        seen[c] = true;
      }
      classes.push(class.into_iter().collect());
    }
    classes
  }

  /// The subgroup generated by `gens`, as a sorted element list.
  pub fn subgroup_generated(&self, gens: &[usize]) -> Vec<usize> {
    let mut members = BTreeSet::from([self.identity]);
    let mut frontier = vec![self.identity];
    while let Some(a) = frontier.pop() {
      for &g in gens {
        let b = self.mul(a, g);
        if members.insert(b) {
          frontier.push(b);
        }
      }
    }
    members.into_iter().collect()
  }

  /// The direct product `self × other`; `(a, b)` has index `a * |other| + b`.
  pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
    let (n, m) = (self.order, other.order);
    let order = n * m;
    let mut mul = vec![0; order * order];
    for x in 0..order {
      for y in 0..order {
        mul[x * order + y] = self.mul(x / m, y / m) * m + other.mul(x % m, y % m);
      }
    }
    let inv = (0..order).map(|x| self.inv(x / m) * m + other.inv(x % m)).collect();
    FiniteGroup {
      name: format!("{}x{}", self.name, other.name),
      order,
      mul,
      identity: self.identity * m + other.identity,
      inv,
    }
  }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
  fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if prefix.len() == used.len() {
      out.push(prefix.clone());
      return;
    }
    for i in 0..used.len() {
      if !used[i] {
        used[i] = true;
        prefix.push(i);
        rec(prefix, used, out);
        prefix.pop();
        used[i] = false;
      }
    }
  }
  let mut out = Vec::new();
  rec(&mut Vec::new(), &mut vec![false; n], &mut out);
  out
}

/// A `Z/N`-valued 3-cochain on a group; `ω(g,h,k) = ζ_N^{exponent}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle3 {
  group_order: usize,
  root_order:  usize,
  exponents:   Vec<usize>,
}

impl Cocycle3 {
  /// The trivial cocycle on a group of the given order.
  pub fn trivial(group: &FiniteGroup) -> Self {
    Self { group_order: group.order(), root_order: 1, exponents: vec![0; group.order().pow(3)] }
  }

  /// Builds a cochain from an exponent function, reducing exponents mod `root_order`.
  /// No validation is performed; see [`verify_cocycle`].
  pub fn from_fn(group: &FiniteGroup, root_order: usize, f: impl Fn(usize, usize, usize) -> i64) -> Self {
    let n = group.order();
    let root_order = root_order.max(1);
    let mut exponents = Vec::with_capacity(n * n * n);
    for g in 0..n {
      for h in 0..n {
        for k in 0..n {
          exponents.push(f(g, h, k).rem_euclid(root_order as i64) as usize);
        }
      }
    }
    Self { group_order: n, root_order, exponents }
  }

  /// The standard generator `ω(a,b,c) = ζ_n^{p·a·⌊(b+c)/n⌋}` of `H³(Z/n, U(1))`.
  /// For `Z/2` and `p = 1` this is `ζ₂^{abc}`.
  pub fn cyclic_standard(n: usize, p: usize) -> Self {
    let g = FiniteGroup::cyclic(n);
    Self::from_fn(&g, n, |a, b, c| (p * a * ((b + c) / n)) as i64)
  }

  /// Parses the cocycle file format: a header line `N <root order>` followed by lines
  /// `g h k exponent`; unlisted entries are zero.
  pub fn from_text(group: &FiniteGroup, text: &str) -> Result<Self> {
    let n = group.order();
    let mut root_order = None;
    let mut exponents = vec![0usize; n * n * n];
    for (lineno, raw) in text.lines().enumerate() {
      let line = raw.split('#').next().unwrap_or("").trim();
      if line.is_empty() {
        continue;
      }
      let toks: Vec<&str> = line.split_whitespace().collect();
      let err = |m: String| Error::SyntaxError { line: lineno + 1, message: m };
      match root_order {
        None => {
          if toks.len() != 2 || toks[0] != "N" {
            return Err(err("expected header 'N <root order>'".into()));
          }
          let r: usize = toks[1].parse().map_err(|_| err(format!("bad root order '{}'", toks[1])))?;
          if r == 0 {
            return Err(err("root order must be positive".into()));
          }
          root_order = Some(r);
        }
        Some(r) => {
          if toks.len() != 4 {
            return Err(err("expected 'g h k exponent'".into()));
          }
          let mut v = [0i64; 4];
          for (slot, tok) in v.iter_mut().zip(&toks) {
            *slot = tok.parse().map_err(|_| err(format!("bad integer '{tok}'")))?;
          }
          let [g, h, k, e] = v;
          for x in [g, h, k] {
            if x < 0 || x as usize >= n {
              return Err(Error::LabelOutOfRange(format!("line {}: element {x} not in group of order {n}", lineno + 1)));
            }
          }
          exponents[(g as usize * n + h as usize) * n + k as usize] = e.rem_euclid(r as i64) as usize;
        }
      }
    }
    let root_order = root_order.ok_or(Error::SyntaxError { line: 1, message: "missing 'N' header".into() })?;
    Ok(Self { group_order: n, root_order, exponents })
  }

  /// Reads a cocycle file; see [`Cocycle3::from_text`].
  pub fn from_file(group: &FiniteGroup, path: &Path) -> Result<Self> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Self::from_text(group, &text)
  }

  /// Order of the group the cochain lives on.
  pub fn group_order(&self) -> usize { self.group_order }

  /// The root-of-unity order `N`.
  pub fn root_order(&self) -> usize { self.root_order }

  /// Exponent of `ω(g,h,k)` in `Z/N`.
  #[inline]
  pub fn exponent(&self, g: usize, h: usize, k: usize) -> usize {
    self.exponents[(g * self.group_order + h) * self.group_order + k]
  }

  /// Whether every exponent vanishes.
  pub fn is_trivial(&self) -> bool { self.exponents.iter().all(|&e| e == 0) }
}

/// True iff `ω` is normalized and satisfies the 3-cocycle identity
/// `ω(h,k,l)·ω(g,hk,l)·ω(g,h,k) = ω(gh,k,l)·ω(g,h,kl)` on all quadruples.
pub fn verify_cocycle(group: &FiniteGroup, omega: &Cocycle3) -> bool {
  first_cocycle_failure(group, omega).is_none()
}

/// The first normalization or cocycle-identity failure, described as text.
pub fn first_cocycle_failure(group: &FiniteGroup, omega: &Cocycle3) -> Option<String> {
  let n = group.order();
  if omega.group_order() != n {
    return Some(format!("cocycle table for order {} used with group of order {n}", omega.group_order()));
  }
  let e = group.identity();
  let r = omega.root_order();
  for a in 0..n {
    for b in 0..n {
      for (x, y, z) in [(e, a, b), (a, e, b), (a, b, e)] {
        if omega.exponent(x, y, z) != 0 {
          return Some(format!("not normalized at ({x},{y},{z})"));
        }
      }
    }
  }
  for g in 0..n {
    for h in 0..n {
      for k in 0..n {
        for l in 0..n {
          let lhs = omega.exponent(h, k, l) + omega.exponent(g, group.mul(h, k), l) + omega.exponent(g, h, k);
          let rhs = omega.exponent(group.mul(g, h), k, l) + omega.exponent(g, h, group.mul(k, l));
          if lhs % r != rhs % r {
            return Some(format!("cocycle identity fails at ({g},{h},{k},{l})"));
          }
        }
      }
    }
  }
  None
}

/// Which side of a biset an action or stabilizer refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
  /// The left `G`-action.
  Left,
  /// The right `G'`-action.
  Right,
}

/// A finite set with commuting left `G`- and right `G'`-actions, transitive under
/// `G × G'^op`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSet {
  left_group:  FiniteGroup,
  right_group: FiniteGroup,
  size:        usize,
  left:        Vec<usize>,
  right:       Vec<usize>,
}

impl BiSet {
  /// Builds a biset from tables `left[g * size + x] = g▷x` and
  /// `right[x * |G'| + h] = x◁h`, verifying actions, commutation and transitivity.
  pub fn new(
    left_group: FiniteGroup,
    right_group: FiniteGroup,
    size: usize,
    left: Vec<usize>,
    right: Vec<usize>,
  ) -> Result<Self> {
    let (n, m) = (left_group.order(), right_group.order());
    if size == 0 {
      return Err(Error::InvalidBiset("empty set".into()));
    }
    if left.len() != n * size || right.len() != size * m {
      return Err(Error::InvalidBiset("action tables have the wrong size".into()));
    }
    if left.iter().chain(&right).any(|&x| x >= size) {
      return Err(Error::LabelOutOfRange("action table entry outside the set".into()));
    }
    let s = Self { left_group, right_group, size, left, right };
    s.check_axioms()?;
    Ok(s)
  }

  fn check_axioms(&self) -> Result<()> {
    let (g, h) = (&self.left_group, &self.right_group);
    for x in 0..self.size {
      if self.act_left(g.identity(), x) != x {
        return Err(Error::InvalidBiset(format!("left unit fails at {x}")));
      }
      if self.act_right(x, h.identity()) != x {
        return Err(Error::InvalidBiset(format!("right unit fails at {x}")));
      }
      for a in 0..g.order() {
        for b in 0..g.order() {
          if self.act_left(a, self.act_left(b, x)) != self.act_left(g.mul(a, b), x) {
            return Err(Error::InvalidBiset(format!("left composition fails at ({a},{b},{x})")));
          }
        }
      }
      for a in 0..h.order() {
        for b in 0..h.order() {
          if self.act_right(self.act_right(x, a), b) != self.act_right(x, h.mul(a, b)) {
            return Err(Error::InvalidBiset(format!("right composition fails at ({x},{a},{b})")));
          }
        }
      }
      for a in 0..g.order() {
        for b in 0..h.order() {
          if self.act_right(self.act_left(a, x), b) != self.act_left(a, self.act_right(x, b)) {
            return Err(Error::InvalidBiset(format!("actions do not commute at ({a},{x},{b})")));
          }
        }
      }
    }
    let orbit = self.orbit(0);
    if orbit.len() != self.size {
      return Err(Error::InvalidBiset(format!("not transitive: orbit of 0 has {} of {} elements", orbit.len(), self.size)));
    }
    Ok(())
  }

  fn orbit(&self, x: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([x]);
    let mut stack = vec![x];
    while let Some(y) = stack.pop() {
      let images = (0..self.left_group.order())
        .map(|a| self.act_left(a, y))
        .chain((0..self.right_group.order()).map(|b| self.act_right(y, b)))
        .collect::<Vec<_>>();
      for z in images {
        if seen.insert(z) {
          stack.push(z);
        }
      }
    }
    seen
  }

  /// The one-point biset `{•}` with trivial actions.
  pub fn trivial(left_group: FiniteGroup, right_group: FiniteGroup) -> Self {
    let (n, m) = (left_group.order(), right_group.order());
    Self { left_group, right_group, size: 1, left: vec![0; n], right: vec![0; m] }
  }

  /// `X = G` as a `(G, G)`-biset: `g▷x◁h = g·x·h`.
  pub fn regular(group: FiniteGroup) -> Self {
    let n = group.order();
    let left = (0..n * n).map(|i| group.mul(i / n, i % n)).collect();
    let right = (0..n * n).map(|i| group.mul(i / n, i % n)).collect();
    Self { left_group: group.clone(), right_group: group, size: n, left, right }
  }

  /// `X = G/N` for a normal subgroup `N` generated by `normal_gens`, as a `(G, G)`-biset
  /// `g▷[x]◁h = [g·x·h]`.
  pub fn normal_quotient(group: FiniteGroup, normal_gens: &[usize]) -> Result<Self> {
    let sub = group.subgroup_generated(normal_gens);
    for &nn in &sub {
      for g in 0..group.order() {
        let c = group.mul(group.mul(g, nn), group.inv(g));
        if sub.binary_search(&c).is_err() {
          return Err(Error::InvalidBiset("subgroup is not normal".into()));
        }
      }
    }
    let cosets = coset_index(&group, &sub, |a, s| group.mul(a, s));
    let size = cosets.iter().max().map_or(0, |m| m + 1);
    let n = group.order();
    let rep: Vec<usize> = (0..size).map(|c| cosets.iter().position(|&k| k == c).expect("rep")).collect();
    let left = (0..n * size).map(|i| cosets[group.mul(i / size, rep[i % size])]).collect();
    let right = (0..size * n).map(|i| cosets[group.mul(rep[i / n], i % n)]).collect();
    Self::new(group.clone(), group, size, left, right)
  }

  /// Left cosets `G/L` of the subgroup generated by `gens`, as a `(G, 1)`-biset.
  pub fn left_cosets(group: FiniteGroup, gens: &[usize]) -> Result<Self> {
    let sub = group.subgroup_generated(gens);
    let cosets = coset_index(&group, &sub, |a, s| group.mul(a, s));
    let size = cosets.iter().max().map_or(0, |m| m + 1);
    let n = group.order();
    let rep: Vec<usize> = (0..size).map(|c| cosets.iter().position(|&k| k == c).expect("rep")).collect();
    let left = (0..n * size).map(|i| cosets[group.mul(i / size, rep[i % size])]).collect();
    let right = (0..size).collect();
    Self::new(group, FiniteGroup::trivial(), size, left, right)
  }

  /// The transitive biset `(G × G'^op)/L` for the subgroup `L` generated by the pairs
  /// `gens = [(g, g'), ...]`; `a▷[(x, y)]◁b = [(a·x, y·b)]`.
  pub fn from_subgroup(left_group: FiniteGroup, right_group: FiniteGroup, gens: &[(usize, usize)]) -> Result<Self> {
    let (n, m) = (left_group.order(), right_group.order());
    // Elements of G × G'^op as pairs encoded x * m + y; product (a,b)(c,d) = (ac, db).
    let prod = |p: usize, q: usize| left_group.mul(p / m, q / m) * m + right_group.mul(q % m, p % m);
    let mut sub = BTreeSet::from([left_group.identity() * m + right_group.identity()]);
    let mut stack: Vec<usize> = sub.iter().copied().collect();
    for &(g, h) in gens {
      if g >= n || h >= m {
        return Err(Error::LabelOutOfRange(format!("generator ({g},{h})")));
      }
    }
    while let Some(p) = stack.pop() {
      for &(g, h) in gens {
        let q = prod(p, g * m + h);
        if sub.insert(q) {
          stack.push(q);
        }
      }
    }
    let total = n * m;
    let mut coset = vec![usize::MAX; total];
    let mut size = 0;
    for p in 0..total {
      if coset[p] == usize::MAX {
        for &s in &sub {
          coset[prod(p, s)] = size;
        }
        size += 1;
      }
    }
    let rep: Vec<usize> = (0..size).map(|c| coset.iter().position(|&k| k == c).expect("rep")).collect();
    let left = (0..n * size).map(|i| coset[prod((i / size) * m + right_group.identity(), rep[i % size])]).collect();
    let right = (0..size * m).map(|i| coset[prod(left_group.identity() * m + i % m, rep[i / m])]).collect();
    Self::new(left_group, right_group, size, left, right)
  }

  /// Parses a biset descriptor over the given groups: `trivial`, `regular` (requires
  /// equal groups), `cosets:<gens>` for `(G × G'^op)/L` with `L` generated by
  /// comma-separated elements `g` or pairs `g.h`, or `table:<path>`.
  pub fn from_descriptor(desc: &str, left_group: FiniteGroup, right_group: FiniteGroup) -> Result<Self> {
    let d = desc.trim();
    if d == "trivial" {
      return Ok(Self::trivial(left_group, right_group));
    }
    if d == "regular" {
      if left_group != right_group {
        return Err(Error::InvalidBiset("the regular biset needs equal left and right groups".into()));
      }
      return Ok(Self::regular(left_group));
    }
    if let Some(path) = d.strip_prefix("table:") {
      let path = Path::new(path.trim());
      let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
      return Self::from_table_text(left_group, right_group, &text);
    }
    if let Some(list) = d.strip_prefix("cosets:") {
      let bad = |t: &str| Error::SyntaxError { line: 1, message: format!("bad coset generator '{t}'") };
      let mut gens = Vec::new();
      for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (g, h) = match tok.split_once('.') {
          Some((g, h)) => (g.parse().map_err(|_| bad(tok))?, h.parse().map_err(|_| bad(tok))?),
          None => (tok.parse().map_err(|_| bad(tok))?, right_group.identity()),
        };
        gens.push((g, h));
      }
      return Self::from_subgroup(left_group, right_group, &gens);
    }
    Err(Error::SyntaxError { line: 1, message: format!("unknown biset descriptor '{desc}'") })
  }

  /// Parses a biset table: the size `n`, then `|G|` rows of `n` entries `g▷x`, then `n`
  /// rows of `|G'|` entries `x◁h`. `#` starts a comment.
  pub fn from_table_text(left_group: FiniteGroup, right_group: FiniteGroup, text: &str) -> Result<Self> {
    let mut nums = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
      for tok in line.split('#').next().unwrap_or("").split_whitespace() {
        nums.push(tok.parse::<usize>().map_err(|_| Error::SyntaxError {
          line:    lineno + 1,
          message: format!("expected a non-negative integer, found '{tok}'"),
        })?);
      }
    }
    let (&n, rest) = nums.split_first().ok_or(Error::SyntaxError { line: 1, message: "empty biset table".into() })?;
    let split = left_group.order() * n;
    if rest.len() != split + n * right_group.order() {
      return Err(Error::InvalidBiset(format!("expected {} table entries, found {}", split + n * right_group.order(), rest.len())));
    }
    Self::new(left_group, right_group, n, rest[..split].to_vec(), rest[split..].to_vec())
  }

  /// The opposite biset `X^#`: a `(G', G)`-biset with `h▷x◁g = g⁻¹▷x◁h⁻¹`.
  pub fn opposite(&self) -> Self {
    let (n, m) = (self.left_group.order(), self.right_group.order());
    let left = (0..m * self.size).map(|i| self.act_right(i % self.size, self.right_group.inv(i / self.size))).collect();
    let right = (0..self.size * n).map(|i| self.act_left(self.left_group.inv(i % n), i / n)).collect();
    Self {
      left_group: self.right_group.clone(),
      right_group: self.left_group.clone(),
      size: self.size,
      left,
      right,
    }
  }

  /// Number of elements of `X`.
  pub fn size(&self) -> usize { self.size }

  /// The group acting on the left.
  pub fn left_group(&self) -> &FiniteGroup { &self.left_group }

  /// The group acting on the right.
  pub fn right_group(&self) -> &FiniteGroup { &self.right_group }

  /// `g ▷ x`.
  #[inline]
  pub fn act_left(&self, g: usize, x: usize) -> usize { self.left[g * self.size + x] }

  /// `x ◁ h`.
  #[inline]
  pub fn act_right(&self, x: usize, h: usize) -> usize { self.right[x * self.right_group.order() + h] }

  /// Stabilizer of `x` under the chosen side's action, as a sorted element list.
  pub fn stabilizer(&self, x: usize, side: Side) -> Vec<usize> {
    match side {
      Side::Left => (0..self.left_group.order()).filter(|&g| self.act_left(g, x) == x).collect(),
      Side::Right => (0..self.right_group.order()).filter(|&h| self.act_right(x, h) == x).collect(),
    }
  }

  /// All `x` with `g ▷ (x ◁ h) = x` for every pair `(g, h)` in `pairs`.
  pub fn fixed_points(&self, pairs: &[(usize, usize)]) -> Vec<usize> {
    (0..self.size).filter(|&x| pairs.iter().all(|&(g, h)| self.act_left(g, self.act_right(x, h)) == x)).collect()
  }
}

fn coset_index(group: &FiniteGroup, sub: &[usize], op: impl Fn(usize, usize) -> usize) -> Vec<usize> {
  let mut index = vec![usize::MAX; group.order()];
  let mut next = 0;
  for a in 0..group.order() {
    if index[a] == usize::MAX {
      for &s in sub {
        index[op(a, s)] = next;
      }
      next += 1;
    }
  }
  index
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn symmetric_three_has_six_elements_and_identity_zero() {
    let g = FiniteGroup::symmetric(3);
    assert_eq!(g.order(), 6);
    assert_eq!(g.identity(), 0);
    assert!(!g.is_abelian());
  }

  #[test]
  fn dihedral_three_is_nonabelian_of_order_six() {
    let g = FiniteGroup::dihedral(3);
    assert_eq!(g.order(), 6);
    assert!(!g.is_abelian());
    assert_eq!(g.conjugacy_classes().len(), 3);
  }

  #[test]
  fn descriptor_parsing() {
    assert_eq!(FiniteGroup::from_descriptor("Z/6").unwrap().order(), 6);
    assert_eq!(FiniteGroup::from_descriptor("S 3").unwrap().order(), 6);
    assert_eq!(FiniteGroup::from_descriptor("S3").unwrap().order(), 6);
    assert_eq!(FiniteGroup::from_descriptor("D 4").unwrap().order(), 8);
    assert!(FiniteGroup::from_descriptor("Q8").is_err());
  }

  #[test]
  fn opposite_of_opposite_is_original() {
    let x = BiSet::regular(FiniteGroup::symmetric(3));
    assert_eq!(x.opposite().opposite(), x);
  }

  #[test]
  fn subgroup_biset_sizes() {
    let g = FiniteGroup::symmetric(3);
    // diagonal subgroup of S3 x S3^op generated by (s, s^-1) pairs gives X ≅ S3.
    let gens: Vec<(usize, usize)> = (0..6).map(|a| (a, g.inv(a))).collect();
    let x = BiSet::from_subgroup(g.clone(), g.clone(), &gens).unwrap();
    assert_eq!(x.size(), 6);
    let t = BiSet::from_subgroup(g.clone(), FiniteGroup::cyclic(2), &[]).unwrap();
    assert_eq!(t.size(), 12);
  }
}
