//! Scattering, resonance, and bound-state solver for one-dimensional quantum
//! potentials made of (or reduced to) finitely many constant layers in a
//! zero-potential environment.
//!
//! All quantities are dimensionless: the stationary equation is
//! `psi'' + k^2 psi = V(x) psi` with energy `E = k^2`, so lengths, momenta,
//! and potential values share one energy scale.
//!
//! The solver works with closed-form layer solutions: a backward recursion
//! over layer coefficients yields the reflection amplitude, a transmission
//! amplitude accumulated in log space, and the wave function anywhere on the
//! axis. Resonances appear as sharp dips of `ln|A_1|` (the magnitude of the
//! decaying-component coefficient in the first layer) and as transmission
//! peaks; bound states of a well are recovered from the resonances of the
//! well uplifted into a barrier structure.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the command
//! line front end live in the companion `qsolve` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bound;
pub mod oracle;
pub mod profile;
pub mod recursion;
pub mod verify;
pub mod spectra;

pub use num_complex::Complex64;
