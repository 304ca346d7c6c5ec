//! Spherical data for group theories: `Vec_G^ω` fusion backends and biset bimodule
//! backends, triangle hom-space dimensions, and bulk 6j symbols.
//!
//! Conventions. A bulk triangle with vertices `a < b < c` is admissible iff
//! `l(ac) = l(bc)·l(ab)` (the later edge multiplies on the left). A defect triangle has
//! two defect edges pointing from the `D`-side to the `C`-side; the bulk edge `c ∈ G`
//! between their heads requires `x_target = c ▷ x_source`, and the bulk edge `d ∈ G'`
//! between their tails requires `x_source = x_target ◁ d`.

use num_rational::BigRational;

use crate::algebra::{first_cocycle_failure, BiSet, Cocycle3, FiniteGroup};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Vec_G^ω`: simples are group elements of dimension 1, duals are inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionBackend {
  group:   FiniteGroup,
  cocycle: Cocycle3,
}

/// Builds the `Vec_G^ω` backend, rejecting tables that are not normalized 3-cocycles.
pub fn vec_g_backend(group: FiniteGroup, cocycle: Cocycle3) -> Result<FusionBackend> {
  if let Some(why) = first_cocycle_failure(&group, &cocycle) {
    return Err(Error::InvalidCocycle(why));
  }
  Ok(FusionBackend { group, cocycle })
}

impl FusionBackend {
  /// `Vec_G` with trivial associator.
  pub fn untwisted(group: FiniteGroup) -> Self {
    let cocycle = Cocycle3::trivial(&group);
    Self { group, cocycle }
  }

  /// A backend whose cochain is not checked; used for negative controls only.
  pub fn unchecked(group: FiniteGroup, cocycle: Cocycle3) -> Self { Self { group, cocycle } }

  /// The grading group.
  pub fn group(&self) -> &FiniteGroup { &self.group }

  /// The associator cocycle.
  pub fn cocycle(&self) -> &Cocycle3 { &self.cocycle }

  /// Number of simple objects.
  pub fn num_simples(&self) -> usize { self.group.order() }

  /// Dimension of a simple object (always 1).
  pub fn dim_simple(&self, _simple: usize) -> u64 { 1 }

  /// Global dimension `Σ dim(i)² = |G|`.
  pub fn global_dim(&self) -> u64 { self.group.order() as u64 }

  /// Dual simple object (group inverse).
  pub fn dual(&self, simple: usize) -> usize { self.group.inv(simple) }
}

/// The bimodule category of a transitive biset; simples are elements of `X`, all of
/// dimension 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleBackend {
  biset: BiSet,
}

impl BimoduleBackend {
  /// Wraps a biset.
  pub fn new(biset: BiSet) -> Self { Self { biset } }

  /// The underlying biset.
  pub fn biset(&self) -> &BiSet { &self.biset }

  /// Dimension of a simple object (always 1).
  pub fn dim_simple(&self, _simple: usize) -> u64 { 1 }

  /// Total dimension `Σ dim(m)² = |X|`.
  pub fn total_dim(&self) -> u64 { self.biset.size() as u64 }
}

/// The local admissibility pattern of a labeled triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrianglePattern {
  /// A bulk triangle read as a boundary cycle: labels and traversal signs (`+1` if the
  /// edge is traversed along its direction) in traversal order.
  Bulk {
    /// Edge labels in traversal order.
    labels: [usize; 3],
    /// Traversal signs.
    signs:  [i8; 3],
  },
  /// Defect triangle whose bulk edge `c ∈ G` runs from the head carrying `m` to the head
  /// carrying `n`.
  DefectLeft {
    /// Source defect label.
    m: usize,
    /// Target defect label.
    n: usize,
    /// Bulk label.
    c: usize,
  },
  /// Defect triangle whose bulk edge `d ∈ G'` runs from the tail carrying `m` to the tail
  /// carrying `n`.
  DefectRight {
    /// Source defect label.
    m: usize,
    /// Target defect label.
    n: usize,
    /// Bulk label.
    d: usize,
  },
}

/// Dimension (0 or 1) of the triangle's hom space.
///
/// `group` is used for bulk patterns; `biset` for defect patterns.
pub fn triangle_hom_dim(pattern: TrianglePattern, group: &FiniteGroup, biset: Option<&BiSet>) -> Result<u8> {
  let need_biset = || biset.ok_or_else(|| Error::LabelOutOfRange("defect pattern without a biset".into()));
  match pattern {
    TrianglePattern::Bulk { labels, signs } => {
      if let Some(&l) = labels.iter().find(|&&l| l >= group.order()) {
        return Err(Error::LabelOutOfRange(format!("group label {l}")));
      }
      let h = |i: usize| if signs[i] >= 0 { labels[i] } else { group.inv(labels[i]) };
      let prod = group.mul(h(2), group.mul(h(1), h(0)));
      Ok(u8::from(prod == group.identity()))
    }
    TrianglePattern::DefectLeft { m, n, c } => {
      let x = need_biset()?;
      check_defect_range(x, m, n, c, x.left_group().order())?;
      Ok(u8::from(n == x.act_left(c, m)))
    }
    TrianglePattern::DefectRight { m, n, d } => {
      let x = need_biset()?;
      check_defect_range(x, m, n, d, x.right_group().order())?;
      Ok(u8::from(m == x.act_right(n, d)))
    }
  }
}

fn check_defect_range(x: &BiSet, m: usize, n: usize, g: usize, order: usize) -> Result<()> {
  if m >= x.size() || n >= x.size() {
    return Err(Error::LabelOutOfRange(format!("biset label {} of {}", m.max(n), x.size())));
  }
  if g >= order {
    return Err(Error::LabelOutOfRange(format!("group label {g}")));
  }
  Ok(())
}

/// Admissibility of the four faces of a bulk tetrahedron with labels on edges
/// `01, 02, 03, 12, 13, 23` (vertices in branching order), in face order
/// `[opposite 0, opposite 1, opposite 2, opposite 3]`.
pub fn bulk_faces_admissible(group: &FiniteGroup, l: [usize; 6]) -> [bool; 4] {
  let [l01, l02, l03, l12, l13, l23] = l;
  [
    l13 == group.mul(l23, l12),
    l03 == group.mul(l23, l02),
    l03 == group.mul(l13, l01),
    l02 == group.mul(l12, l01),
  ]
}

/// The exponent `k` in `ζ_N^k` of an admissible bulk tetrahedron: `orient · ω(l23, l12, l01)`.
pub fn bulk_sixj_exponent(backend: &FusionBackend, l: [usize; 6], orient: i8) -> i64 {
  let e = backend.cocycle.exponent(l[5], l[3], l[0]) as i64;
  if orient >= 0 { e } else { -e }
}

/// The bulk 6j symbol of a tetrahedron labeled on edges `01, 02, 03, 12, 13, 23`.
///
/// Zero if some face is inadmissible, otherwise `ζ_N^{±ω(l23, l12, l01)}` with the sign
/// given by the tetrahedron's orientation.
pub fn bulk_sixj(backend: &FusionBackend, labels: [usize; 6], orient: i8) -> Scalar<BigRational> {
  if !bulk_faces_admissible(&backend.group, labels).iter().all(|&a| a) {
    return Scalar::zero();
  }
  Scalar::zeta(backend.cocycle.root_order(), bulk_sixj_exponent(backend, labels, orient))
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::algebra::verify_cocycle;

  fn z2_omega() -> Cocycle3 { Cocycle3::cyclic_standard(2, 1) }

  /// Labels of the tetrahedron on the given four of five vertices 0..4, from path data.
  fn labels_from(edge: &dyn Fn(usize, usize) -> usize, v: [usize; 4]) -> [usize; 6] {
    [edge(v[0], v[1]), edge(v[0], v[2]), edge(v[0], v[3]), edge(v[1], v[2]), edge(v[1], v[3]), edge(v[2], v[3])]
  }

  /// 2-3 identity: `6j(0123)·6j(1234) = Σ_{l04} 6j(0124)·6j(0134)⁻¹·6j(0234)`.
  fn biedenharn_elliott_holds(backend: &FusionBackend) -> bool {
    let g = backend.group();
    let n = g.order();
    for a in 0..n {
      for b in 0..n {
        for c in 0..n {
          for d in 0..n {
            // edge(i,j) for the flat labeling generated by path labels a, b, c, d.
            let path = [a, b, c, d];
            let flat = |i: usize, j: usize| (i..j).fold(g.identity(), |acc, k| g.mul(path[k], acc));
            let lhs = &bulk_sixj(backend, labels_from(&flat, [0, 1, 2, 3]), 1)
              * &bulk_sixj(backend, labels_from(&flat, [1, 2, 3, 4]), 1);
            let mut rhs = Scalar::zero();
            for x in 0..n {
              let edge = |i: usize, j: usize| if (i, j) == (0, 4) { x } else { flat(i, j) };
              let term = &(&bulk_sixj(backend, labels_from(&edge, [0, 1, 2, 4]), 1)
                * &bulk_sixj(backend, labels_from(&edge, [0, 1, 3, 4]), -1))
                * &bulk_sixj(backend, labels_from(&edge, [0, 2, 3, 4]), 1);
              rhs = &rhs + &term;
            }
            if lhs != rhs {
              return false;
            }
          }
        }
      }
    }
    true
  }

  #[test]
  fn z2_cocycle_values() {
    let b = vec_g_backend(FiniteGroup::cyclic(2), z2_omega()).unwrap();
    assert_eq!(bulk_sixj(&b, [1, 0, 1, 1, 0, 1], 1), Scalar::integer(-1));
    let t = FusionBackend::untwisted(FiniteGroup::cyclic(2));
    assert_eq!(bulk_sixj(&t, [1, 0, 1, 1, 0, 1], 1), Scalar::one());
    assert_eq!(bulk_sixj(&t, [1, 1, 1, 1, 0, 1], 1), Scalar::zero());
  }

  #[test]
  fn rejects_non_cocycle() {
    let g = FiniteGroup::cyclic(2);
    let bad = Cocycle3::from_fn(&g, 2, |a, _, _| a as i64);
    assert!(matches!(vec_g_backend(g, bad), Err(Error::InvalidCocycle(_))));
  }

  #[test]
  fn biedenharn_elliott_for_cyclic_cocycles() {
    for n in 1..=4 {
      for p in 0..n {
        let b = vec_g_backend(FiniteGroup::cyclic(n), Cocycle3::cyclic_standard(n, p)).unwrap();
        assert!(biedenharn_elliott_holds(&b), "Z/{n}, p={p}");
      }
    }
  }

  #[test]
  fn biedenharn_elliott_fails_for_corrupted_table() {
    let g = FiniteGroup::cyclic(2);
    // Normalized but not closed: ω(1,1,1) = ζ₄.
    let bad = Cocycle3::from_fn(&g, 4, |a, b, c| (a * b * c) as i64);
    assert!(!verify_cocycle(&g, &bad));
    assert!(!biedenharn_elliott_holds(&FusionBackend::unchecked(g, bad)));
  }

  #[test]
  fn hom_dims() {
    let g = FiniteGroup::symmetric(3);
    let (a, b) = (1, 3);
    let ab = g.mul(a, b);
    let pat = TrianglePattern::Bulk { labels: [g.inv(ab), b, a], signs: [1, 1, 1] };
    // g·h·(gh)⁻¹ read with the later edge on the left.
    assert_eq!(triangle_hom_dim(pat, &g, None).unwrap(), 1);
    let pat = TrianglePattern::Bulk { labels: [ab, b, a], signs: [-1, 1, 1] };
    assert_eq!(triangle_hom_dim(pat, &g, None).unwrap(), 1);
    let pat = TrianglePattern::Bulk { labels: [a, 2, a], signs: [-1, 1, 1] };
    assert_eq!(triangle_hom_dim(pat, &g, None).unwrap(), 0);
    let x = BiSet::trivial(g.clone(), FiniteGroup::cyclic(2));
    for c in 0..6 {
      assert_eq!(triangle_hom_dim(TrianglePattern::DefectLeft { m: 0, n: 0, c }, &g, Some(&x)).unwrap(), 1);
    }
    assert!(triangle_hom_dim(TrianglePattern::DefectLeft { m: 1, n: 0, c: 0 }, &g, Some(&x)).is_err());
  }
}
