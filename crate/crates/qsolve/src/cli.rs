//! Argument types, command implementations, and the exit-code policy.
//!
//! Exit codes: `0` success, `1` usage or input-content errors, `2` solver
//! failures, `3` filesystem I/O failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use qsolve_core::bound::{self, BoundError, BoundSolve, SolveConfig};
use qsolve_core::oracle::tm_scatter;
use qsolve_core::profile::{discretize, DiscretizationRule, Potential, Sampling, StepProfile};
use qsolve_core::recursion::{scatter, WaveEvaluator};
use qsolve_core::spectra::energy_grid;
use qsolve_core::verify::boundary_continuity;
use qsolve_core::Complex64;

use crate::formats;
use crate::parallel::{self, EngineFn};
use crate::source::{self, SourceError};

/// Stencil spacing for the `--check` smoothness gate: wide enough that the
/// one-sided derivative stencils stay far above the roundoff floor, narrow
/// enough that their truncation error sits well under the 1e-8 gate.
const CHECK_STENCIL_H: f64 = 4e-5;

/// Relative defect allowed by `--check` for both the wave function and its
/// derivative across layer boundaries.
const CHECK_GATE: f64 = 1e-8;

/// Application failure with the exit code it maps to.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Solver(_) => 2,
            AppError::Io(_) => 3,
        }
    }
}

impl From<SourceError> for AppError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Io { .. } => AppError::Io(e.to_string()),
            SourceError::Content(_) => AppError::Usage(e.to_string()),
        }
    }
}

fn usage(e: impl ToString) -> AppError {
    AppError::Usage(e.to_string())
}

fn solver(e: impl ToString) -> AppError {
    AppError::Solver(e.to_string())
}

/// Bound-pipeline failures split by origin: bad model construction is a
/// usage problem, everything past it is the solver's.
fn bound_error(e: BoundError) -> AppError {
    match e {
        BoundError::Profile(p) => usage(p),
        other => solver(other),
    }
}

/// Scattering, resonance, and bound-state solver for one-dimensional
/// potentials made of (or reduced to) constant layers.
#[derive(Debug, Parser)]
#[command(name = "qsolve", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep scattering over an energy grid and write a spectrum CSV.
    Transmit(TransmitArgs),
    /// Solve for bound states and write them as JSON records.
    Eigen(EigenArgs),
    /// Evaluate the scattering wave function on a position grid.
    Wavefunction(WavefunctionArgs),
    /// Reduce a potential to a step profile and write it as JSON.
    Discretize(DiscretizeArgs),
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    /// Potential source: a JSON file path or `builtin:name[?key=value,...]`.
    #[arg(long)]
    pub potential: String,
    /// Segment count used to discretize smooth potentials.
    #[arg(long, default_value_t = 2000)]
    pub segments: usize,
    /// Per-segment sampling rule for discretization.
    #[arg(long, value_enum, default_value_t = SamplingArg::Midpoint)]
    pub sampling: SamplingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    /// Segment value = potential at the segment midpoint.
    Midpoint,
    /// Segment value = Simpson-weighted mean over the segment.
    Average,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Midpoint => Sampling::Midpoint,
            SamplingArg::Average => Sampling::Average,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Backward recursion over cutoff amplitudes (the native engine).
    Recursive,
    /// Transfer-matrix engine (independent cross-check).
    Tm,
}

impl Engine {
    fn function(self) -> EngineFn {
        match self {
            Engine::Recursive => scatter,
            Engine::Tm => tm_scatter,
        }
    }
}

#[derive(Debug, Args)]
pub struct TransmitArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Lower edge of the energy window (must be positive).
    #[arg(long, allow_negative_numbers = true)]
    pub emin: f64,
    /// Upper edge of the energy window.
    #[arg(long, allow_negative_numbers = true)]
    pub emax: f64,
    /// Number of energy grid points.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// Scattering engine.
    #[arg(long, value_enum, default_value_t = Engine::Recursive)]
    pub engine: Engine,
    /// CSV output path (a `.gp` gnuplot companion is written next to it);
    /// stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Lower edge of the resonance search window (default: the model's own,
    /// from 0.5 up to the outer barrier height).
    #[arg(long, requires = "emax", allow_negative_numbers = true)]
    pub emin: Option<f64>,
    /// Upper edge of the resonance search window.
    #[arg(long, requires = "emin", allow_negative_numbers = true)]
    pub emax: Option<f64>,
    /// Energy tolerance of the resonance refinement.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_e: f64,
    /// Grid size of the initial resonance scan.
    #[arg(long, default_value_t = 1500)]
    pub points: usize,
    /// Raise a bare well by this constant to build the scattering model
    /// (rejected when the potential already records its own uplift).
    #[arg(long, allow_negative_numbers = true)]
    pub uplift: Option<f64>,
    /// Width of the flanking barriers added around a bare smooth well.
    #[arg(long, allow_negative_numbers = true)]
    pub flank: Option<f64>,
    /// JSON output path (the summary table then goes to stdout); with no
    /// path the JSON goes to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WavefunctionArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Energy of the incident wave.
    #[arg(long, allow_negative_numbers = true)]
    pub energy: f64,
    /// Left edge of the position grid (default: profile left edge - 2).
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,
    /// Right edge of the position grid (default: profile right edge + 2).
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,
    /// Number of position grid points.
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Verify wave-function smoothness across all layer boundaries before
    /// writing; failure aborts with a solver error.
    #[arg(long)]
    pub check: bool,
    /// CSV output path (a `.gp` gnuplot companion is written next to it);
    /// stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// JSON output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command under the configured thread pool.
pub fn run(cli: Cli) -> Result<(), AppError> {
    match parallel::thread_pool().map_err(AppError::Usage)? {
        Some(pool) => pool.install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<(), AppError> {
    match command {
        Command::Transmit(a) => cmd_transmit(a),
        Command::Eigen(a) => cmd_eigen(a),
        Command::Wavefunction(a) => cmd_wavefunction(a),
        Command::Discretize(a) => cmd_discretize(a),
    }
}

fn rule_of(p: &PotentialArgs) -> Result<DiscretizationRule, AppError> {
    if p.segments == 0 {
        return Err(usage("--segments must be at least 1"));
    }
    Ok(DiscretizationRule {
        segments: p.segments,
        sampling: p.sampling.into(),
    })
}

fn load_profile(p: &PotentialArgs) -> Result<StepProfile, AppError> {
    let rule = rule_of(p)?;
    source::load(&p.potential)?
        .into_profile(&rule)
        .map_err(usage)
}

fn write_file(path: &Path, text: &str) -> Result<(), AppError> {
    fs::write(path, text).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

/// Writes `text` to `--out` plus a gnuplot companion at the same path with
/// extension `gp`, or to stdout (companion-less) when no path was given.
fn write_data_with_companion(
    out: Option<&PathBuf>,
    text: &str,
    companion: impl FnOnce(&str) -> String,
) -> Result<(), AppError> {
    match out {
        Some(path) => {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| usage(format!("--out {}: not a file name", path.display())))?
                .to_owned();
            write_file(path, text)?;
            write_file(&path.with_extension("gp"), &companion(&name))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_window(emin: f64, emax: f64) -> Result<(), AppError> {
    if !(emin.is_finite() && emax.is_finite() && 0.0 < emin && emin < emax) {
        return Err(usage(format!(
            "energy window must satisfy 0 < emin < emax, got ({emin}, {emax})"
        )));
    }
    Ok(())
}

fn check_points(points: usize) -> Result<(), AppError> {
    if points < 2 {
        return Err(usage(format!("--points must be at least 2, got {points}")));
    }
    Ok(())
}

fn cmd_transmit(a: TransmitArgs) -> Result<(), AppError> {
    check_window(a.emin, a.emax)?;
    check_points(a.points)?;
    let profile = load_profile(&a.potential)?;
    let energies = energy_grid(a.emin, a.emax, a.points).map_err(usage)?;
    let spectrum =
        parallel::par_sweep_with(a.engine.function(), &profile, &energies).map_err(solver)?;
    write_data_with_companion(
        a.out.as_ref(),
        &formats::transmit_csv(&spectrum),
        formats::transmit_gnuplot,
    )
}

fn cmd_wavefunction(a: WavefunctionArgs) -> Result<(), AppError> {
    if !(a.energy.is_finite() && a.energy > 0.0) {
        return Err(usage(format!("--energy must be positive, got {}", a.energy)));
    }
    check_points(a.points)?;
    let profile = load_profile(&a.potential)?;
    let xmin = a.xmin.unwrap_or(profile.left_edge() - 2.0);
    let xmax = a.xmax.unwrap_or(profile.right_edge() + 2.0);
    if !(xmin.is_finite() && xmax.is_finite() && xmin < xmax) {
        return Err(usage(format!(
            "position window must satisfy xmin < xmax, got ({xmin}, {xmax})"
        )));
    }
    let ev = WaveEvaluator::new(&profile, a.energy).map_err(solver)?;
    if a.check {
        let report = boundary_continuity(&profile, a.energy, CHECK_STENCIL_H).map_err(solver)?;
        eprintln!("check: {report}");
        if !(report.max_psi_defect < CHECK_GATE && report.max_dpsi_defect < CHECK_GATE) {
            return Err(solver(format!(
                "smoothness check failed (gate {CHECK_GATE:.0e}): {report}"
            )));
        }
    }
    let step = (xmax - xmin) / (a.points - 1) as f64;
    let xs: Vec<f64> = (0..a.points)
        .map(|i| {
            if i + 1 == a.points {
                xmax
            } else {
                xmin + step * i as f64
            }
        })
        .collect();
    let psis: Vec<Complex64> = xs.iter().map(|&x| ev.psi(x)).collect();
    write_data_with_companion(
        a.out.as_ref(),
        &formats::wavefunction_csv(&xs, &psis),
        formats::wavefunction_gnuplot,
    )
}

fn cmd_eigen(a: EigenArgs) -> Result<(), AppError> {
    if !(a.tol_e.is_finite() && a.tol_e > 0.0) {
        return Err(usage(format!("--tol-e must be positive, got {}", a.tol_e)));
    }
    check_points(a.points)?;
    let window = match (a.emin, a.emax) {
        (Some(lo), Some(hi)) => {
            check_window(lo, hi)?;
            Some((lo, hi))
        }
        // clap's `requires` links reject a lone edge before we get here.
        _ => None,
    };
    let rule = rule_of(&a.potential)?;
    let cfg = SolveConfig {
        e_window: window,
        tol_e: a.tol_e,
        initial_points: a.points,
        ..SolveConfig::default()
    };
    let solve = solve_for(&a, &rule, &cfg)?;

    let json = formats::bound_states_json(&solve.states);
    let summary = formats::eigen_summary(&solve);
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            print!("{summary}");
        }
        None => {
            print!("{json}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn solve_for(
    a: &EigenArgs,
    rule: &DiscretizationRule,
    cfg: &SolveConfig,
) -> Result<BoundSolve, AppError> {
    match source::load(&a.potential.potential)? {
        Potential::Smooth(s) if s.well_region().is_some() => {
            if a.uplift.is_some() || a.flank.is_some() {
                return Err(usage(
                    "this potential already records its model uplift and well; \
                     --uplift/--flank apply to bare wells",
                ));
            }
            let region = s.well_region().expect("checked above");
            let uplift = s.uplift();
            let profile = discretize(&s, rule).map_err(usage)?;
            bound::solve_model(&profile, uplift, region, cfg).map_err(bound_error)
        }
        Potential::Smooth(s) => {
            bound::solve_well(s, a.uplift.unwrap_or(0.0), a.flank.unwrap_or(2.0), rule, cfg)
                .map_err(bound_error)
        }
        Potential::Step(p) => {
            if a.flank.is_some() {
                return Err(usage(
                    "--flank only applies to smooth well sources; step profiles \
                     already carry their barriers",
                ));
            }
            // The outermost layers adjoin the exterior, so whatever encloses
            // the states (barrier or flank material) lives there; state
            // statistics are taken strictly inside them. Normalisation, node
            // counting, and localization all refer to this region.
            let bp = p.breakpoints();
            let region = if bp.len() >= 4 {
                (bp[1], bp[bp.len() - 2])
            } else {
                (p.left_edge(), p.right_edge())
            };
            bound::solve_model(&p, a.uplift.unwrap_or(0.0), region, cfg).map_err(bound_error)
        }
    }
}

fn cmd_discretize(a: DiscretizeArgs) -> Result<(), AppError> {
    let profile = load_profile(&a.potential)?;
    let json = formats::profile_json(&profile);
    match &a.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
