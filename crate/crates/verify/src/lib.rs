//! Acceptance checks for `defectsum`; see `tests/acceptance.rs`.
