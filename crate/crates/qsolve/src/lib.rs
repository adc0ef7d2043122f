//! Command-line front end and file formats for the `qsolve-core` solver.
//!
//! The binary (`main.rs`) is the product; this library surface carries its
//! building blocks so integration tests can drive them directly:
//!
//! - [`expr`] — arithmetic expressions in one variable for potential files,
//! - [`source`] — potential sources (`builtin:` specs and JSON files),
//! - [`formats`] — deterministic CSV / JSON / gnuplot emission,
//! - [`parallel`] — ordered parallel energy sweeps,
//! - [`cli`] — argument types, command implementations, exit-code policy.

pub mod cli;
pub mod expr;
pub mod formats;
pub mod parallel;
pub mod source;
