//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use defectsum::algebra::{BiSet, FiniteGroup};
use defectsum::builders::*;
use defectsum::complex::{ComplexBuilder, DefectComplex};
use defectsum::polygon::{Attachment, End, Layer, Line, PolygonDiagram};

pub fn group(desc: &str) -> FiniteGroup { FiniteGroup::from_descriptor(desc).unwrap() }

/// The quaternion group; element `2u + s` is `(−1)^s · [1, i, j, k][u]`.
pub fn quaternion() -> FiniteGroup {
  // Unit products: table[u][v] = (sign, unit) of e_u · e_v.
  let table = [
    [(0, 0), (0, 1), (0, 2), (0, 3)],
    [(0, 1), (1, 0), (0, 3), (1, 2)],
    [(0, 2), (1, 3), (1, 0), (0, 1)],
    [(0, 3), (0, 2), (1, 1), (1, 0)],
  ];
  let mul = (0..64)
    .map(|i| {
      let (a, b) = (i / 8, i % 8);
      let (s, u) = table[a / 2][b / 2];
      2 * u + ((s + a % 2 + b % 2) % 2)
    })
    .collect();
  FiniteGroup::from_table("Q8", 8, mul).unwrap()
}

/// Groups of order at most four.
pub fn groups_up_to_4() -> Vec<FiniteGroup> {
  let z2 = FiniteGroup::cyclic(2);
  vec![FiniteGroup::cyclic(1), z2.clone(), FiniteGroup::cyclic(3), FiniteGroup::cyclic(4), z2.direct_product(&z2)]
}

/// Groups of order at most six.
pub fn groups_up_to_6() -> Vec<FiniteGroup> {
  let mut out = groups_up_to_4();
  out.extend([FiniteGroup::cyclic(5), FiniteGroup::cyclic(6), FiniteGroup::symmetric(3)]);
  out
}

/// Groups of order at most eight, one per isomorphism class.
pub fn groups_up_to_8() -> Vec<FiniteGroup> {
  let z2 = FiniteGroup::cyclic(2);
  let mut out = groups_up_to_6();
  out.extend([
    FiniteGroup::cyclic(7),
    FiniteGroup::cyclic(8),
    z2.direct_product(&FiniteGroup::cyclic(4)),
    z2.direct_product(&z2).direct_product(&z2),
    FiniteGroup::dihedral(4),
    quaternion(),
  ]);
  out
}

/// Two type-b tetrahedra sharing their defect square's diagonal triangle.
pub fn two_type_b() -> DefectComplex {
  let mut b = ComplexBuilder::new();
  let (c, d) = (b.add_region("G"), b.add_region("Gp"));
  b.add_area("X", c, d);
  let v = [b.add_vertex(d), b.add_vertex(d), b.add_vertex(c), b.add_vertex(c), b.add_vertex(c)];
  b.add_tet([v[0], v[1], v[2], v[3]], 1).unwrap();
  b.add_tet([v[0], v[1], v[2], v[4]], -1).unwrap();
  b.build_oriented().unwrap()
}

/// Fine neighbourhoods of defect discs with at most six tetrahedra.
pub fn fine_discs() -> Vec<(&'static str, DefectComplex)> {
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

/// A square crossed by a `C` line from corner 0 to corner 2 and a `D` line from corner
/// 1 to corner 3.
pub fn square(x: &BiSet, c: usize, d: usize, segments: [usize; 4]) -> PolygonDiagram {
  let lines = vec![Line { layer: Layer::C, label: c }, Line { layer: Layer::D, label: d }];
  let corners = vec![vec![(0, End::Tail)], vec![(1, End::Tail)], vec![(0, End::Head)], vec![(1, End::Head)]];
  PolygonDiagram::new(x.clone(), segments.to_vec(), corners, lines, vec![]).unwrap()
}

fn flip(e: End) -> End {
  match e {
    End::Head => End::Tail,
    End::Tail => End::Head,
  }
}

/// The reflected diagram: boundary order reversed and every line reversed.
pub fn mirror_diagram(d: &PolygonDiagram) -> PolygonDiagram {
  let n = d.num_corners();
  let segments: Vec<usize> = (0..n).map(|j| d.segments()[(n - j) % n]).collect();
  let rev = |v: &Vec<Attachment>| v.iter().rev().map(|&(l, e)| (l, flip(e))).collect::<Vec<_>>();
  let corners: Vec<Vec<Attachment>> = (0..n).map(|j| rev(&d.corners()[n - 1 - j])).collect();
  let vertices: Vec<Vec<Attachment>> = d.vertices().iter().map(rev).collect();
  PolygonDiagram::new(d.biset().clone(), segments, corners, d.lines().to_vec(), vertices).unwrap()
}

/// Distinct transitive `(G, G')`-bisets `(G × G'^op)/L` with at most `max_size`
/// elements, for `L` generated by one or two pairs.
pub fn small_bisets(g: &FiniteGroup, gp: &FiniteGroup, max_size: usize) -> Vec<BiSet> {
  let pairs: Vec<(usize, usize)> = (0..g.order()).flat_map(|a| (0..gp.order()).map(move |b| (a, b))).collect();
  let mut out: Vec<BiSet> = Vec::new();
  for i in 0..pairs.len() {
    for j in i..pairs.len() {
      let Ok(x) = BiSet::from_subgroup(g.clone(), gp.clone(), &[pairs[i], pairs[j]]) else { continue };
      if x.size() <= max_size && !out.contains(&x) {
        out.push(x);
      }
    }
  }
  out
}
