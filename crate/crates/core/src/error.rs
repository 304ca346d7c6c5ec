//! Crate-wide error type.

use thiserror::Error;

/// Every failure mode surfaced by the library.
///
/// Variants carry a human-readable detail string; parse errors additionally carry the
/// 1-based line number of the offending input line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
  /// An explicit multiplication table is not associative.
  #[error("multiplication table is not associative: {0}")]
  NonAssociative(String),
  /// An explicit multiplication table has no two-sided unit.
  #[error("multiplication table has no two-sided identity")]
  NoIdentity,
  /// Some element of an explicit multiplication table has no two-sided inverse.
  #[error("element {0} has no two-sided inverse")]
  NoInverse(usize),
  /// A 3-cocycle table is not normalized or violates the cocycle identity.
  #[error("invalid 3-cocycle: {0}")]
  InvalidCocycle(String),
  /// A biset table violates the action axioms, commutation, or transitivity.
  #[error("invalid biset: {0}")]
  InvalidBiset(String),
  /// A label or element index lies outside its index set.
  #[error("label out of range: {0}")]
  LabelOutOfRange(String),
  /// A move, gluing identity, or diagram operation does not match its local pattern.
  #[error("pattern mismatch: {0}")]
  PatternMismatch(String),
  /// A move would produce tetrahedra that are not generic transversal.
  #[error("move would break transversality: {0}")]
  WouldBreakTransversality(String),
  /// The input triangulation is not generic transversal.
  #[error("not generic transversal: {0}")]
  NotGenericTransversal(String),
  /// The input triangulation is not transversal to its defect surfaces.
  #[error("not transversal: {0}")]
  NotTransversal(String),
  /// A gluing matching identifies incompatible cells.
  #[error("incompatible matching: {0}")]
  IncompatibleMatching(String),
  /// Malformed text input.
  #[error("syntax error at line {line}: {message}")]
  SyntaxError {
    /// 1-based line number.
    line:    usize,
    /// Description of the problem.
    message: String,
  },
  /// Text input references a cell id that was never declared.
  #[error("dangling reference at line {line}: {message}")]
  DanglingReference {
    /// 1-based line number.
    line:    usize,
    /// Description of the problem.
    message: String,
  },
  /// A complex fails validation and cannot be evaluated.
  #[error("invalid complex: {0}")]
  InvalidComplex(String),
  /// Boundary data does not cover every boundary edge.
  #[error("incomplete boundary data: {0}")]
  IncompleteBoundary(String),
  /// A polygon diagram is structurally malformed.
  #[error("malformed diagram: {0}")]
  MalformedDiagram(String),
  /// A complex is not a fine neighbourhood of a defect disc.
  #[error("not a fine neighbourhood of a disc: {0}")]
  NotADiscNeighbourhood(String),
  /// A surface or complex cannot be oriented consistently.
  #[error("not orientable: {0}")]
  NotOrientable(String),
  /// A dual cycle is not a simple closed cycle of face-adjacent tetrahedra.
  #[error("not a simple cycle: {0}")]
  NotASimpleCycle(String),
  /// A brute-force enumeration exceeds its configured cap.
  #[error("enumeration too large: {count} labelings exceed cap {cap}")]
  TooLarge {
    /// Number of labelings that would have to be enumerated.
    count: u128,
    /// The configured cap.
    cap:   u128,
  },
  /// A planar-diagram code is malformed.
  #[error("malformed PD code: {0}")]
  MalformedPD(String),
  /// A backend name referenced by a complex is not bound.
  #[error("unknown backend: {0}")]
  UnknownBackend(String),
  /// A nontrivial 3-cocycle is attached to a region that touches a defect surface.
  #[error("unsupported cocycle: {0}")]
  UnsupportedCocycle(String),
  /// Reading an input file failed.
  #[error("i/o error: {0}")]
  Io(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
