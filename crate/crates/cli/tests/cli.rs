//! End-to-end runs of the `defectsum` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use defectsum::algebra::{BiSet, FiniteGroup};
use defectsum::polygon::{evaluate, surface_polygon};

fn fixture(name: &str) -> PathBuf { PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name) }

fn run(args: &[&str]) -> Output { Command::new(env!("CARGO_BIN_EXE_defectsum")).args(args).output().expect("binary runs") }

fn stdout(o: &Output) -> String { String::from_utf8_lossy(&o.stdout).into_owned() }

fn s3() -> String { fixture("s3.dc").display().to_string() }

#[test]
fn statesum_of_the_three_sphere() {
  let o = run(&["statesum", &s3(), "--group", "Z/2"]);
  assert!(o.status.success());
  assert_eq!(stdout(&o), "value: 1/2\nrescaled: 1/2\n");
  let o = run(&["statesum", &s3(), "--group", "S 3", "--float"]);
  assert!(stdout(&o).starts_with("value: 1/6 (≈ 0.1666"), "{}", stdout(&o));
}

#[test]
fn defect_sphere_example_ratio() {
  let o = run(&["example", "sphere", "--g", "S3", "--gp", "Z/2", "--biset", "trivial"]);
  assert!(o.status.success());
  assert!(stdout(&o).contains("ratio: 1/2\n"), "{}", stdout(&o));
}

#[test]
fn genus_example_matches_expected_ratio() {
  let o = run(&["example", "genus", "--genus", "1", "--g", "S3", "--gp", "Z/2", "--biset", "cosets:1"]);
  let out = stdout(&o);
  let line = |key: &str| out.lines().find_map(|l| l.strip_prefix(key)).map(str::to_string);
  assert_eq!(line("ratio: "), line("expected: "), "{out}");
}

#[test]
fn fuzz_is_invariant_and_deterministic() {
  let args = ["fuzz-pachner", &s3(), "--group", "S 3", "--moves", "100", "--seed", "7"];
  let a = run(&args);
  assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
  assert_eq!(a.stdout, run(&args).stdout);
  let defect = fixture("defect_sphere.dc").display().to_string();
  let o = run(&["fuzz-pachner", &defect, "--g", "S3", "--gp", "Z/2", "--biset", "cosets:1", "--moves", "25", "--seed", "1"]);
  assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_does_not_change_output() {
  let f = fixture("prism_fan2.dc").display().to_string();
  let base = ["statesum", &f, "--g", "S3", "--gp", "Z/2", "--biset", "cosets:1"];
  let one = run(&[&base[..], &["--threads", "1"]].concat());
  let four = run(&[&base[..], &["--threads", "4"]].concat());
  assert!(one.status.success());
  assert_eq!(one.stdout, four.stdout);
}

#[test]
fn validate_reports_and_sets_exit_code() {
  let o = run(&["validate", &s3(), "--links"]);
  assert_eq!((o.status.code(), stdout(&o)), (Some(0), "ok\n".to_string()));
  let dir = tempfile::tempdir().unwrap();
  let bad = dir.path().join("bad.dc");
  let text = std::fs::read_to_string(fixture("s3.dc")).unwrap().replace("0 0 1 2 3 + bulk", "0 0 1 2 3 - bulk");
  std::fs::write(&bad, text).unwrap();
  let o = run(&["validate", bad.to_str().unwrap()]);
  assert_eq!(o.status.code(), Some(1));
  assert!(stdout(&o).contains("Orientation"));
}

#[test]
fn errors_exit_with_two() {
  assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
  assert_eq!(run(&["statesum", "/nonexistent.dc"]).status.code(), Some(2));
  assert_eq!(run(&["statesum", &s3(), "--group", "Q/8"]).status.code(), Some(2));
  assert_eq!(run(&["example", "sphere", "--g", "S3", "--gp", "Z/2", "--biset", "regular"]).status.code(), Some(2));
}

#[test]
fn polygon_file_evaluates_like_the_library() {
  let g = FiniteGroup::from_descriptor("S3").unwrap();
  let h = FiniteGroup::from_descriptor("Z/2").unwrap();
  let x = BiSet::from_descriptor("cosets:1", g.clone(), h.clone()).unwrap();
  let dir = tempfile::tempdir().unwrap();
  let noncommuting = (0..6).flat_map(|a| (0..6).map(move |b| (a, b))).find(|&(a, b)| g.mul(a, b) != g.mul(b, a)).unwrap();
  let mut seen = [false; 2];
  for (a, b) in [((0, 0), (0, 0)), ((noncommuting.0, 0), (noncommuting.1, 0)), ((0, 1), (0, 1))] {
    let d = surface_polygon(&x, &[a], &[b], 0).unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, d.to_string()).unwrap();
    let o = run(&["polygon", path.to_str().unwrap(), "--g", "S3", "--gp", "Z/2", "--biset", "cosets:1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), format!("value: {}\n", evaluate(&d)));
    seen[usize::from(evaluate(&d).is_zero())] = true;
  }
  assert_eq!(seen, [true, true], "both outcomes exercised");
}

#[test]
fn oracles() {
  assert_eq!(stdout(&run(&["oracle", "flat", &s3(), "--g", "S3"])), "value: 1/6\n");
  let o = stdout(&run(&["oracle", "hom", "x, y | xyxYXY", "--g", "S3"]));
  assert!(o.contains("homomorphisms: 12\n") && o.contains("conjugacy classes: 4\n"), "{o}");
  let dir = tempfile::tempdir().unwrap();
  let pd = dir.path().join("trefoil.pd");
  std::fs::write(&pd, "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]\n").unwrap();
  assert_eq!(stdout(&run(&["oracle", "wirtinger", pd.to_str().unwrap(), "--g", "S3"])), o);
  let t = fixture("defect_tet.dc").display().to_string();
  let data = ["--g", "S3", "--gp", "Z/2", "--biset", "cosets:1"];
  let brute = stdout(&run(&[&["oracle", "brute", &t][..], &data].concat()));
  let fast = stdout(&run(&[&["statesum", &t][..], &data].concat()));
  assert_eq!(brute.lines().next(), fast.lines().next());
}
