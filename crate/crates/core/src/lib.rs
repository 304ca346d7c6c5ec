//! Exact state sums for triangulated 3-manifolds with defect surfaces over finite-group
//! data.
//!
//! The crate evaluates Turaev–Viro–Barrett–Westbury style state sums where the bulk
//! regions carry `Vec_G^ω` and the defect surfaces carry bimodule categories of
//! transitive bisets. Alongside the engine it ships move operators (bistellar moves,
//! stellar subdivisions, shellings), a polygon-diagram evaluator, builders for the
//! standard example geometries, and brute-force reference oracles.
//!
//! Scalars are exact: [`ScalarValue`] is a cyclotomic rational times formal square roots.

pub mod algebra;
pub mod backend;
pub mod builders;
pub mod complex;
pub mod error;
pub mod oracle;
pub mod polygon;
pub mod scalar;
pub mod statesum;

pub use error::{Error, Result};

/// Exact rational coefficients used by every evaluation path.
pub type Rational = num_rational::BigRational;

/// The scalar type of state sums and 6j symbols.
pub type ScalarValue = scalar::Scalar<Rational>;

/// Cyclotomic numbers with exact rational coefficients.
pub type CyclotomicValue = scalar::Cyclotomic<Rational>;
