//! The example geometries evaluated through the state-sum engine.

use defectsum::algebra::{BiSet, FiniteGroup, Side};
use defectsum::oracle::{presentation_hom_count, wirtinger, Presentation};
use defectsum::builders::*;
use defectsum::statesum::{state_sum, BoundaryData, Theory};
use defectsum::backend::FusionBackend;
use defectsum::{Rational, ScalarValue};

fn group(desc: &str) -> FiniteGroup { FiniteGroup::from_descriptor(desc).unwrap() }

fn q(n: i64, d: i64) -> ScalarValue { ScalarValue::ratio(n, d) }

#[test]
fn s3_is_one_over_order() {
  let c = s3_five_tets();
  for (desc, n) in [("Z/2", 2), ("S3", 6), ("Z/3", 3)] {
    let th = Theory::new().with_fusion("G", FusionBackend::untwisted(group(desc)));
    let r = state_sum(&th, &c, &BoundaryData::empty()).unwrap();
    assert_eq!(r.value, q(1, n), "{desc}");
  }
}

#[test]
fn defect_sphere_ratio() {
  let labels = Labels::default();
  let c = ball_with_defect_sphere(&labels).unwrap();
  let (plain, emap) = plain_ball(&c).unwrap();
  for x in [BiSet::trivial(group("S3"), group("Z/2")), BiSet::regular(group("Z/2")), BiSet::regular(group("S3"))] {
    let th = labels.theory(x.clone());
    let g = x.left_group().clone();
    // The all-identity boundary labeling is flat.
    let b = BoundaryData::from_labels((0..6).map(|e| (e, g.identity())));
    let z = state_sum(&th, &c, &b).unwrap().value;
    let z0 = state_sum(&th, &plain, &transport_boundary(&b, &emap)).unwrap().value;
    assert!(!z0.is_zero());
    assert_eq!(z, z0 * q(x.size() as i64, x.right_group().order() as i64));
  }
}

#[test]
fn torus_cylinder_counts_fixed_points() {
  let s = surface_triangulation(1).unwrap();
  let labels = Labels::default();
  let (c, layout) = prism_cylinder(&s, &labels).unwrap();
  let x = BiSet::regular(group("Z/3"));
  let th = labels.theory(x.clone());
  let g = x.left_group().clone();
  let mut checked = 0;
  for a in 0..3 {
    for b in 0..3 {
      for a2 in 0..3 {
        for b2 in 0..3 {
          let top = s.extend_flat(&g, &[Some(a), Some(b)]).unwrap();
          let bottom = s.extend_flat(&g, &[Some(a2), Some(b2)]).unwrap();
          let r = state_sum(&th, &c, &layout.boundary(&bottom, &top)).unwrap();
          let pairs: Vec<(usize, usize)> = (0..s.edges.len()).map(|k| (top[k], g.inv(bottom[k]))).collect();
          let want = x.fixed_points(&pairs).len() as i64;
          assert_eq!(r.rescaled, q(want, 1), "{top:?} {bottom:?}");
          checked += 1;
        }
      }
    }
  }
  assert_eq!(checked, 81);
}

#[test]
fn genus_ball_ratio() {
  let labels = Labels::default();
  for g in 1..=2 {
    let c = ball_with_genus_g(g, &labels).unwrap();
    let (plain, emap) = plain_ball(&c).unwrap();
    for x in [BiSet::trivial(group("S3"), group("Z/2")), BiSet::regular(group("Z/2")), BiSet::left_cosets(group("S3"), &[1]).unwrap()] {
      let th = labels.theory(x.clone());
      let gg = x.left_group().clone();
      let b = BoundaryData::from_labels((0..12).map(|e| (e, gg.identity())));
      let z = state_sum(&th, &c, &b).unwrap().value;
      let z0 = state_sum(&th, &plain, &transport_boundary(&b, &emap)).unwrap().value;
      let sg = x.stabilizer(0, Side::Left).len() as i64;
      let sgp = x.stabilizer(0, Side::Right).len() as i64;
      let want = Rational::from_integer((x.size() as i64 * sg.pow(g as u32) * sgp.pow(g as u32)).into())
        / Rational::from_integer((x.right_group().order() as i64).into());
      assert_eq!(z, z0 * ScalarValue::rational(want), "g={g}");
    }
  }
}

/// `|Hom(π, G)| / |G|` from a presentation of the knot group.
fn hom_ratio(p: &Presentation, g: &FiniteGroup) -> ScalarValue {
  let (homs, _classes) = presentation_hom_count(p, g);
  q(homs as i64, g.order() as i64)
}

#[test]
fn unknot_complement() {
  let fx = unknot_fixture();
  let c = knot_defect_complex(&fx.complex, &fx.cycle, &Labels::knot()).unwrap();
  let p = Presentation::parse("x |").unwrap();
  for desc in ["Z/2", "S3", "Z/6"] {
    let g = group(desc);
    let r = state_sum(&knot_theory(g.clone()), &c, &BoundaryData::empty()).unwrap();
    assert_eq!(r.value, hom_ratio(&p, &g), "{desc}");
    assert_eq!(r.value, q(1, 1), "{desc}");
  }
}

#[test]
fn trefoil_complement() {
  let fx = trefoil_fixture();
  let c = knot_defect_complex(&fx.complex, &fx.cycle, &Labels::knot()).unwrap();
  let p = wirtinger("X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]").unwrap();
  for desc in ["Z/2", "S3"] {
    let g = group(desc);
    let r = state_sum(&knot_theory(g.clone()), &c, &BoundaryData::empty()).unwrap();
    assert_eq!(r.value, hom_ratio(&p, &g), "{desc}");
  }
}
