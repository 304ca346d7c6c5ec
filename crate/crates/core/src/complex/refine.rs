//! Refinement of defect neighbourhoods into fine neighbourhoods.
//!
//! A set of tetrahedra meeting a defect surface is a fine neighbourhood when every vertex
//! and every edge or triangle not meeting the surface lies on its boundary. The
//! refinement subdivides, in order, every tetrahedron meeting the surface (1-4), every
//! internal triangle meeting it (stellar) and every internal edge meeting it (stellar),
//! first with new vertices on the `C`-side and then once more on the `D`-side.

use std::collections::BTreeSet;

use super::moves::{apply_move_tracked, MoveDescriptor, MoveKind, MoveOutcome, Placement};
use super::validate::validate;
use super::{DefectComplex, EdgeKind, TetClass};
use crate::error::{Error, Result};

/// Tetrahedra with an edge in area `a`.
fn area_tets(c: &DefectComplex, a: usize) -> Vec<usize> {
  (0..c.tets.len())
    .filter(|&t| c.frame_unchecked(t).edges.iter().any(|&e| c.edges[e].kind == EdgeKind::Defect(a)))
    .collect()
}

/// Whether the tetrahedra meeting area `a` form a fine neighbourhood of its surface.
pub fn is_fine_neighbourhood(c: &DefectComplex, a: usize) -> bool {
  let tets = area_tets(c, a);
  if tets.is_empty() {
    return false;
  }
  let in_n: BTreeSet<usize> = tets.iter().copied().collect();
  // Sub-boundary triangles: faces of exactly one neighbourhood tet slot.
  let mut bdry_tri = BTreeSet::new();
  for &t in &tets {
    for &f in &c.tets[t].faces {
      let inside = c.triangle_tets(f).iter().filter(|(u, _)| in_n.contains(u)).count();
      if inside == 1 {
        bdry_tri.insert(f);
      }
    }
  }
  let mut bdry_edge = BTreeSet::new();
  let mut bdry_vert = BTreeSet::new();
  for &f in &bdry_tri {
    for &e in &c.triangles[f].edges {
      bdry_edge.insert(e);
      bdry_vert.insert(c.edges[e].tail);
      bdry_vert.insert(c.edges[e].head);
    }
  }
  let meets = |e: usize| c.edges[e].kind == EdgeKind::Defect(a);
  for &t in &tets {
    let fr = c.frame_unchecked(t);
    if fr.verts.iter().any(|v| !bdry_vert.contains(v)) {
      return false;
    }
    if fr.edges.iter().any(|&e| !meets(e) && !bdry_edge.contains(&e)) {
      return false;
    }
    for &f in &c.tets[t].faces {
      if !c.triangles[f].edges.iter().any(|&e| meets(e)) && !bdry_tri.contains(&f) {
        return false;
      }
    }
  }
  // Connectedness through shared triangles.
  let mut seen = BTreeSet::from([tets[0]]);
  let mut stack = vec![tets[0]];
  while let Some(t) = stack.pop() {
    for &f in &c.tets[t].faces {
      for &(u, _) in c.triangle_tets(f) {
        if in_n.contains(&u) && seen.insert(u) {
          stack.push(u);
        }
      }
    }
  }
  seen.len() == tets.len()
}

fn remap(ids: &mut Vec<usize>, map: &[Option<usize>]) { *ids = ids.iter().filter_map(|&x| map[x]).collect(); }

/// Applies one subdivision to each listed cell, carrying the remaining ids and the
/// composite edge map forward.
fn subdivide_all(
  c: DefectComplex,
  emap: &mut [Option<usize>],
  kind: MoveKind,
  mut cells: Vec<usize>,
  placement: Placement,
  map_of: fn(&MoveOutcome) -> &Vec<Option<usize>>,
) -> Result<DefectComplex> {
  let mut cur = c;
  while let Some(x) = cells.pop() {
    let out = apply_move_tracked(&cur, &MoveDescriptor::placed(kind, vec![x], placement))?;
    remap(&mut cells, map_of(&out));
    for e in emap.iter_mut() {
      *e = e.and_then(|e| out.edge_map[e]);
    }
    cur = out.complex;
  }
  Ok(cur)
}

/// Subdivides `c` until the tetrahedra meeting each defect surface form a fine
/// neighbourhood. Complexes that already have this property are returned unchanged.
pub fn refine_to_fine_neighbourhoods(c: &DefectComplex) -> Result<DefectComplex> {
  Ok(refine_to_fine_neighbourhoods_tracked(c)?.0)
}

/// [`refine_to_fine_neighbourhoods`] together with the old → new edge map. Subdivisions
/// only add cells, so every old edge survives.
pub fn refine_to_fine_neighbourhoods_tracked(c: &DefectComplex) -> Result<(DefectComplex, Vec<Option<usize>>)> {
  let report = validate(c);
  if !report.is_ok() {
    return Err(Error::NotGenericTransversal(report.to_string().trim().to_string()));
  }
  let mut emap: Vec<Option<usize>> = (0..c.edges.len()).map(Some).collect();
  let areas: Vec<usize> = (0..c.areas.len()).filter(|&a| !area_tets(c, a).is_empty()).collect();
  if areas.iter().all(|&a| is_fine_neighbourhood(c, a)) {
    return Ok((c.clone(), emap));
  }
  let mut cur = c.clone();
  for placement in [Placement::C, Placement::D] {
    let tets: Vec<usize> = (0..cur.tets.len()).filter(|&t| cur.tets[t].class != TetClass::Bulk).collect();
    cur = subdivide_all(cur, &mut emap, MoveKind::OneFour, tets, placement, |o| &o.tet_map)?;
    let tris: Vec<usize> =
      (0..cur.triangles.len()).filter(|&f| cur.is_defect_triangle(f) && !cur.is_boundary_triangle(f)).collect();
    cur = subdivide_all(cur, &mut emap, MoveKind::StellarTriangle, tris, placement, |o| &o.tri_map)?;
    let edges: Vec<usize> = (0..cur.edges.len()).filter(|&e| cur.is_defect_edge(e) && !cur.is_boundary_edge(e)).collect();
    cur = subdivide_all(cur, &mut emap, MoveKind::StellarEdge, edges, placement, |o| &o.edge_map)?;
  }
  Ok((cur, emap))
}
