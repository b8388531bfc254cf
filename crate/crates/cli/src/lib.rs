//! Library side of the `sortlab` command-line tool: pinned reference
//! fixtures and the self-check battery behind `sortlab selftest`.
//!
//! The binary in `src/main.rs` is a thin argument-parsing shell; the
//! fixtures live here so integration tests can assert against the same
//! numbers the self-test uses.

pub mod golden;
