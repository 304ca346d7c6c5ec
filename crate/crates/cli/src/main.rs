//! Command-line front end: validation, state sums, move fuzzing, the example
//! geometries, polygon diagrams and the brute-force oracles.
//!
//! Scalars are printed exactly; `--float` appends a decimal approximation. Usage and
//! library errors exit with status 2, a failed invariance check with status 1.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use defectsum::algebra::{BiSet, Cocycle3, FiniteGroup, Side};
use defectsum::backend::{vec_g_backend, BimoduleBackend, FusionBackend};
use defectsum::builders::{
  ball_with_defect_sphere, ball_with_genus_g, knot_defect_complex, knot_theory, plain_ball, prism_cylinder,
  surface_triangulation, transport_boundary, trefoil_fixture, unknot_fixture, Labels,
};
use defectsum::complex::{self, random_walk, validate_with, DefectComplex, EdgeKind, ValidateOptions, WalkLimits};
use defectsum::oracle::{brute_state_sum, flat_count, presentation_hom_count, wirtinger, Presentation};
use defectsum::polygon::{evaluate, parse_diagram};
use defectsum::statesum::{state_sum_with, BoundaryData, Options, Theory};
use defectsum::{Error, Rational, Result, ScalarValue};

/// The planar-diagram code of the trefoil used by `example knot trefoil`.
const TREFOIL_PD: &str = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";

#[derive(Parser)]
#[command(name = "defectsum", version, about = "Exact state sums for 3-manifolds with defect surfaces")]
struct Cli {
  #[command(subcommand)]
  command: Command,
}

#[derive(Subcommand)]
enum Command {
  /// Check the structural invariants of a complex file and print the report.
  Validate {
    file:  PathBuf,
    /// Also check that vertex links are spheres or discs.
    #[arg(long)]
    links: bool,
  },
  /// Evaluate the state sum of a complex file.
  Statesum {
    file:     PathBuf,
    /// Boundary labels, one `edge label` pair per line.
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[command(flatten)]
    data:     Data,
    #[command(flatten)]
    out:      Output,
  },
  /// Apply seeded random moves and check that the state sum never changes.
  FuzzPachner {
    file:         PathBuf,
    /// Number of moves.
    #[arg(long, default_value_t = 20)]
    moves:        usize,
    #[arg(long, default_value_t = 0)]
    seed:         u64,
    /// Boundary labels, one `edge label` pair per line.
    #[arg(long)]
    boundary:     Option<PathBuf>,
    /// Vertex cap for moves that add vertices (default: initial count + 2).
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Tetrahedron cap for moves that add tetrahedra (default: initial count + 8).
    #[arg(long)]
    max_tets:     Option<usize>,
    #[command(flatten)]
    data:         Data,
    #[command(flatten)]
    out:          Output,
  },
  /// Build and evaluate one of the example geometries.
  Example {
    name:   ExampleName,
    /// Genus of the surface (genus and cylinder examples).
    #[arg(long, default_value_t = 1)]
    genus:  usize,
    /// Knot of the knot-complement example.
    #[arg(long, value_enum, default_value_t = Knot::Trefoil)]
    knot:   Knot,
    /// Generator labels on the top surface of the cylinder, comma-separated.
    #[arg(long, value_delimiter = ',')]
    top:    Vec<usize>,
    /// Generator labels on the bottom surface of the cylinder, comma-separated.
    #[arg(long, value_delimiter = ',')]
    bottom: Vec<usize>,
    #[command(flatten)]
    data:   Data,
    #[command(flatten)]
    out:    Output,
  },
  /// Evaluate a polygon diagram file.
  Polygon {
    file: PathBuf,
    #[command(flatten)]
    data: Data,
  },
  /// Run a brute-force reference computation.
  Oracle {
    #[command(subcommand)]
    mode: OracleMode,
  },
}

#[derive(Subcommand)]
enum OracleMode {
  /// Enumerate every labeling of a complex file.
  Brute {
    file:     PathBuf,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[command(flatten)]
    data:     Data,
    #[command(flatten)]
    out:      Output,
  },
  /// Count flat labelings of a closed defect-free complex over `--group`.
  Flat {
    file: PathBuf,
    #[command(flatten)]
    data: Data,
  },
  /// Count homomorphisms from a presented group, e.g. `"x, y | xyxYXY"`.
  Hom {
    presentation: String,
    #[command(flatten)]
    data:         Data,
  },
  /// Count homomorphisms from the knot group of a planar-diagram code file.
  Wirtinger {
    file: PathBuf,
    #[command(flatten)]
    data: Data,
  },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleName {
  Sphere,
  Cylinder,
  Genus,
  Knot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Knot {
  Unknot,
  Trefoil,
}

/// Algebraic data bound to the backend names of a complex.
#[derive(Args)]
struct Data {
  /// Group on the bulk (descriptor `Z/n`, `S n`, `D n` or `table:<path>`).
  #[arg(long, visible_alias = "g", default_value = "Z/2")]
  group:   String,
  /// Group on the `D`-side of defect surfaces (default: same as `--group`).
  #[arg(long)]
  gp:      Option<String>,
  /// Biset on defect surfaces: `trivial`, `regular`, `cosets:<gens>` or `table:<path>`.
  #[arg(long, default_value = "trivial")]
  biset:   String,
  /// 3-cocycle table for the `--group` regions.
  #[arg(long)]
  cocycle: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
  /// Worker threads for the label search.
  #[arg(long, default_value_t = 1)]
  threads: usize,
  /// Append decimal approximations to exact scalars.
  #[arg(long)]
  float:   bool,
}

impl Data {
  fn groups(&self) -> Result<(FiniteGroup, FiniteGroup)> {
    let g = FiniteGroup::from_descriptor(&self.group)?;
    let gp = match &self.gp {
      Some(d) => FiniteGroup::from_descriptor(d)?,
      None => g.clone(),
    };
    Ok((g, gp))
  }

  fn biset(&self) -> Result<BiSet> {
    let (g, gp) = self.groups()?;
    BiSet::from_descriptor(&self.biset, g, gp)
  }

  fn fusion(&self, g: &FiniteGroup) -> Result<FusionBackend> {
    match &self.cocycle {
      Some(path) => vec_g_backend(g.clone(), Cocycle3::from_file(g, path)?),
      None => Ok(FusionBackend::untwisted(g.clone())),
    }
  }

  /// Binds `--gp` to every region that is the `D`-side of some area, `--group` to all
  /// other regions and `--biset` to every area.
  fn theory_for(&self, c: &DefectComplex) -> Result<Theory> {
    let (g, gp) = self.groups()?;
    let d_sides: BTreeSet<usize> = c.areas().iter().map(|a| a.d_region).collect();
    let mut th = Theory::new();
    for (r, region) in c.regions().iter().enumerate() {
      th = if d_sides.contains(&r) {
        th.with_fusion(&region.backend, FusionBackend::untwisted(gp.clone()))
      } else {
        th.with_fusion(&region.backend, self.fusion(&g)?)
      };
    }
    if !c.areas().is_empty() {
      let x = self.biset()?;
      for a in c.areas() {
        th = th.with_bimodule(&a.backend, BimoduleBackend::new(x.clone()));
      }
    }
    Ok(th)
  }
}

impl Output {
  fn options(&self) -> Options { Options { threads: self.threads.max(1) } }

  fn scalar(&self, v: &ScalarValue) -> String {
    if self.float {
      format!("{v} (≈ {})", v.to_float_string())
    } else {
      v.to_string()
    }
  }
}

enum Failure {
  Usage(Error),
  Invariance(String),
}

impl From<Error> for Failure {
  fn from(e: Error) -> Self { Self::Usage(e) }
}

fn read(path: &Path) -> Result<String> {
  std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_complex(path: &Path) -> Result<DefectComplex> { complex::parse(&read(path)?) }

/// Reads `edge label` pairs; blank lines and `#` comments are ignored. Without a file,
/// bulk boundary edges get the identity and defect boundary edges the element `0`.
fn load_boundary(c: &DefectComplex, th: &Theory, path: Option<&Path>) -> Result<BoundaryData> {
  let Some(path) = path else {
    let mut pairs = Vec::new();
    for e in c.boundary_edges() {
      let label = match c.edges()[e].kind {
        EdgeKind::Bulk(r) => th.fusion(&c.regions()[r].backend)?.group().identity(),
        EdgeKind::Defect(_) => 0,
      };
      pairs.push((e, label));
    }
    return Ok(BoundaryData::from_labels(pairs));
  };
  let text = read(path)?;
  let mut pairs = Vec::new();
  for (i, line) in text.lines().enumerate() {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
      continue;
    }
    let bad = || Error::SyntaxError { line: i + 1, message: format!("expected `edge label`, got {line:?}") };
    let nums: Vec<usize> = line.split_whitespace().map(|t| t.parse().map_err(|_| bad())).collect::<Result<_>>()?;
    match nums[..] {
      [e, l] => pairs.push((e, l)),
      _ => return Err(bad()),
    }
  }
  Ok(BoundaryData::from_labels(pairs))
}

/// `a / b` when both are the same formal square root times rationals.
fn ratio(a: &ScalarValue, b: &ScalarValue) -> Option<Rational> {
  if b.is_zero() {
    return None;
  }
  if a.is_zero() {
    return Some(Rational::from_integer(0.into()));
  }
  let single = |s: &ScalarValue| {
    let mut it = s.terms().filter(|(_, c)| !c.is_zero());
    let (r, c) = it.next()?;
    it.next().is_none().then_some(())?;
    Some((r, c.as_rational()?))
  };
  let ((ra, qa), (rb, qb)) = (single(a)?, single(b)?);
  (ra == rb).then(|| qa / qb)
}

fn print_ratio(a: &ScalarValue, b: &ScalarValue) {
  match ratio(a, b) {
    Some(q) => println!("ratio: {q}"),
    None => println!("ratio: undefined"),
  }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
  match cli.command {
    Command::Validate { file, links } => {
      let c = load_complex(&file)?;
      let report = validate_with(&c, ValidateOptions { check_links: links });
      print!("{report}");
      if !report.is_ok() {
        return Err(Failure::Invariance("complex is invalid".into()));
      }
    }
    Command::Statesum { file, boundary, data, out } => {
      let c = load_complex(&file)?;
      let th = data.theory_for(&c)?;
      let b = load_boundary(&c, &th, boundary.as_deref())?;
      let r = state_sum_with(&th, &c, &b, out.options())?;
      println!("value: {}", out.scalar(&r.value));
      println!("rescaled: {}", out.scalar(&r.rescaled));
    }
    Command::FuzzPachner { file, moves, seed, boundary, max_vertices, max_tets, data, out } => {
      let c = load_complex(&file)?;
      let th = data.theory_for(&c)?;
      let mut b = load_boundary(&c, &th, boundary.as_deref())?;
      let limits = WalkLimits {
        max_vertices: max_vertices.unwrap_or(c.num_vertices() + 2),
        max_tets:     max_tets.unwrap_or(c.tets().len() + 8),
      };
      let z0 = state_sum_with(&th, &c, &b, out.options())?.value;
      println!("initial: {} ({} tets)", out.scalar(&z0), c.tets().len());
      let walk = random_walk(&c, moves, seed, limits);
      for (i, step) in walk.iter().enumerate() {
        b = transport_boundary(&b, &step.outcome.edge_map);
        let m = &step.outcome.complex;
        let z = state_sum_with(&th, m, &b, out.options())?.value;
        let d = &step.descriptor;
        println!("move {:>3}: {:?} {:?} -> {} tets, Z = {}", i + 1, d.kind, d.cells, m.tets().len(), out.scalar(&z));
        if z != z0 {
          return Err(Failure::Invariance(format!("state sum changed at move {}: {z} != {z0}", i + 1)));
        }
      }
      println!("applied {} of {moves} moves; state sum invariant", walk.len());
    }
    Command::Example { name, genus, knot, top, bottom, data, out } => example(name, genus, knot, &top, &bottom, &data, &out)?,
    Command::Polygon { file, data } => {
      let d = parse_diagram(&data.biset()?, &read(&file)?)?;
      println!("value: {}", evaluate(&d));
    }
    Command::Oracle { mode } => oracle(mode)?,
  }
  Ok(())
}

fn example(
  name: ExampleName,
  genus: usize,
  knot: Knot,
  top: &[usize],
  bottom: &[usize],
  data: &Data,
  out: &Output,
) -> std::result::Result<(), Failure> {
  let labels = Labels::default();
  let opts = out.options();
  match name {
    ExampleName::Sphere | ExampleName::Genus => {
      let c = match name {
        ExampleName::Sphere => ball_with_defect_sphere(&labels)?,
        _ => ball_with_genus_g(genus, &labels)?,
      };
      let x = data.biset()?;
      let th = labels.theory(x.clone());
      let (plain, emap) = plain_ball(&c)?;
      let id = x.left_group().identity();
      let b = BoundaryData::from_labels(c.boundary_edges().into_iter().map(|e| (e, id)));
      let z = state_sum_with(&th, &c, &b, opts)?.value;
      let z0 = state_sum_with(&th, &plain, &transport_boundary(&b, &emap), opts)?.value;
      println!("defect ball: {} ({} tets)", out.scalar(&z), c.tets().len());
      println!("plain ball: {} ({} tets)", out.scalar(&z0), plain.tets().len());
      print_ratio(&z, &z0);
      let g = match name {
        ExampleName::Sphere => 0,
        _ => genus as u32,
      };
      let sg = x.stabilizer(0, Side::Left).len() as i64;
      let sgp = x.stabilizer(0, Side::Right).len() as i64;
      let want = Rational::new((x.size() as i64 * sg.pow(g) * sgp.pow(g)).into(), (x.right_group().order() as i64).into());
      println!("expected: {want}");
    }
    ExampleName::Cylinder => {
      let s = surface_triangulation(genus)?;
      let x = data.biset()?;
      let g = x.left_group().clone();
      let th = labels.theory(x.clone());
      let (c, layout) = prism_cylinder(&s, &labels)?;
      let generators = |given: &[usize]| -> Result<Vec<usize>> {
        let mut known = vec![Some(g.identity()); 2 * genus];
        for (k, &l) in given.iter().enumerate().take(2 * genus) {
          if l >= g.order() {
            return Err(Error::LabelOutOfRange(format!("generator label {l} for a group of order {}", g.order())));
          }
          known[k] = Some(l);
        }
        s.extend_flat(&g, &known)
          .ok_or_else(|| Error::LabelOutOfRange("generator labels do not satisfy the surface relation".into()))
      };
      let (t, bt) = (generators(top)?, generators(bottom)?);
      let r = state_sum_with(&th, &c, &layout.boundary(&bt, &t), opts)?;
      let pairs: Vec<(usize, usize)> = (0..s.edges.len()).map(|k| (t[k], g.inv(bt[k]))).collect();
      println!("value: {}", out.scalar(&r.value));
      println!("rescaled: {}", out.scalar(&r.rescaled));
      println!("fixed points: {}", x.fixed_points(&pairs).len());
    }
    ExampleName::Knot => {
      let (fx, pd) = match knot {
        Knot::Unknot => (unknot_fixture(), ""),
        Knot::Trefoil => (trefoil_fixture(), TREFOIL_PD),
      };
      let g = FiniteGroup::from_descriptor(&data.group)?;
      let c = knot_defect_complex(&fx.complex, &fx.cycle, &Labels::knot())?;
      let r = state_sum_with(&knot_theory(g.clone()), &c, &BoundaryData::empty(), opts)?;
      let (homs, classes) = presentation_hom_count(&wirtinger(pd)?, &g);
      println!("value: {} ({} tets)", out.scalar(&r.value), c.tets().len());
      println!("homomorphisms / |G|: {}", Rational::new(homs.into(), (g.order() as u64).into()));
      println!("conjugacy classes: {classes}");
    }
  }
  Ok(())
}

fn hom_report(p: &Presentation, g: &FiniteGroup) {
  let (homs, classes) = presentation_hom_count(p, g);
  println!("homomorphisms: {homs}");
  println!("conjugacy classes: {classes}");
  println!("homomorphisms / |G|: {}", Rational::new(homs.into(), (g.order() as u64).into()));
}

fn oracle(mode: OracleMode) -> Result<()> {
  match mode {
    OracleMode::Brute { file, boundary, data, out } => {
      let c = load_complex(&file)?;
      let th = data.theory_for(&c)?;
      let v = brute_state_sum(&th, &c, &load_boundary(&c, &th, boundary.as_deref())?)?;
      println!("value: {}", out.scalar(&v));
    }
    OracleMode::Flat { file, data } => {
      let c = load_complex(&file)?;
      println!("value: {}", flat_count(&c, &FiniteGroup::from_descriptor(&data.group)?)?);
    }
    OracleMode::Hom { presentation, data } => {
      hom_report(&Presentation::parse(&presentation)?, &FiniteGroup::from_descriptor(&data.group)?);
    }
    OracleMode::Wirtinger { file, data } => {
      hom_report(&wirtinger(&read(&file)?)?, &FiniteGroup::from_descriptor(&data.group)?);
    }
  }
  Ok(())
}

fn main() -> ExitCode {
  match run(Cli::parse()) {
    Ok(()) => ExitCode::SUCCESS,
    Err(Failure::Usage(e)) => {
      eprintln!("error: {e}");
      ExitCode::from(2)
    }
    Err(Failure::Invariance(msg)) => {
      eprintln!("error: {msg}");
      ExitCode::from(1)
    }
  }
}
