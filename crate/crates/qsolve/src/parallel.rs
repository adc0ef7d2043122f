//! Ordered parallel energy sweeps.
//!
//! Each grid energy solves independently; results are assembled back in grid
//! order, so a sweep's output is identical bytes no matter how many worker
//! threads ran it.

use qsolve_core::profile::StepProfile;
use qsolve_core::recursion::{ScatteringResult, SolverError};
use qsolve_core::spectra::Spectrum;
use rayon::prelude::*;

/// Per-energy solver a sweep fans out over (the recursion engine or the
/// transfer-matrix engine).
pub type EngineFn = fn(&StepProfile, f64) -> Result<ScatteringResult, SolverError>;

/// Sweeps `energies` in parallel with `engine` and assembles the spectrum in
/// grid order. The first failing energy aborts the sweep.
pub fn par_sweep_with(
    engine: EngineFn,
    profile: &StepProfile,
    energies: &[f64],
) -> Result<Spectrum, SolverError> {
    let results: Vec<ScatteringResult> = energies
        .par_iter()
        .map(|&e| engine(profile, e))
        .collect::<Result<_, _>>()?;
    Ok(Spectrum::from_results(profile, energies.to_vec(), &results))
}

/// Builds a dedicated rayon pool when `QSOLVE_THREADS` caps the worker
/// count; `Ok(None)` means the default pool is fine.
pub fn thread_pool() -> Result<Option<rayon::ThreadPool>, String> {
    let value = match std::env::var("QSOLVE_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(None),
        Err(e) => return Err(format!("QSOLVE_THREADS: {e}")),
        Ok(v) => v,
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QSOLVE_THREADS must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| e.to_string())
}
