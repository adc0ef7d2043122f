//! Bound states of finite wells via barrier-enclosed resonances.
//!
//! A well `W(x)` with bound levels `E_b < 0` is raised by a constant
//! `uplift` and flanked by constant barriers of the same height, which turns
//! every bound level into a sharp scattering resonance at
//! `E_res = E_b + uplift > 0`. Inside the well and the flanks the shifted
//! problem is *identical* to the original (the local momenta
//! `sqrt(V - E)` are unchanged), so for opaque flanks the resonance energies
//! reproduce the bound spectrum up to the leakage width, which decays like
//! `exp(-2 sqrt(-E_b) * flank_width)`. The solver locates the resonances,
//! subtracts the uplift, and reconstructs the (real) eigenfunctions from the
//! scattering wave at resonance.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::profile::{
    discretize, uplift_model, DiscretizationRule, ProfileError, SmoothPotential, StepProfile,
};
use crate::recursion::{SolverError, WaveEvaluator};
use crate::spectra::{find_resonances_adaptive, Detector, SpectraError};

/// Which part of the complex scattering wave carried the standing wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Real,
    Imaginary,
}

impl Part {
    pub fn as_str(self) -> &'static str {
        match self {
            Part::Real => "real",
            Part::Imaginary => "imaginary",
        }
    }
}

/// Where a state's probability mass sits relative to the well midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    /// At least [`LOCALIZATION_FRACTION`] of the mass left of the midpoint.
    Left,
    /// At least [`LOCALIZATION_FRACTION`] of the mass right of the midpoint.
    Right,
    Delocalized,
}

impl Localization {
    pub fn as_str(self) -> &'static str {
        match self {
            Localization::Left => "left",
            Localization::Right => "right",
            Localization::Delocalized => "delocalized",
        }
    }
}

/// Mass fraction on one side of the well midpoint required to call a state
/// localized there.
pub const LOCALIZATION_FRACTION: f64 = 0.9;

/// Samples of the chosen part with amplitude below this fraction of the
/// state's maximum are ignored by the node counter: in opaque flanks and in
/// the minority lobe of a strongly localized state the true amplitude drops
/// below what the scattering wave resolves, and sign flips there are noise,
/// not nodes.
pub const NODE_AMPLITUDE_FLOOR: f64 = 1e-3;

/// One reconstructed bound state.
///
/// All statistics (normalization, node count, localization) are taken over
/// the well region: on the incident side of the model the scattering wave
/// carries an exponential artifact of the probe wave that has nothing to do
/// with the bound state, and for very opaque flanks that artifact can
/// dominate the flank samples (see [`BoundState::contrast`]). Inside the
/// well the standing wave dominates by many orders of magnitude even when
/// the resonance is far narrower than the energy refinement can resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    /// Position in the energy-ordered spectrum found inside the window.
    pub index: usize,
    /// Bound energy, `resonance_energy - uplift`.
    pub eigenvalue: f64,
    /// Resonance energy of the uplifted model.
    pub resonance_energy: f64,
    pub part_used: Part,
    /// Sign changes of the eigenfunction over the well region, ignoring
    /// samples under [`NODE_AMPLITUDE_FLOOR`].
    pub node_count: usize,
    pub localization: Localization,
    /// Sample positions covering flanks and well.
    pub grid: Vec<f64>,
    /// Real eigenfunction samples, unit L2 norm over the well region.
    pub psi: Vec<f64>,
    /// Well sub-interval of the model the state belongs to.
    pub well_region: (f64, f64),
    /// Peak amplitude inside the well region over peak amplitude outside
    /// it. Much greater than 1 when the flank samples show the state's own
    /// decaying tails; at or below 1 when they are swamped by the incident
    /// probe wave (energy refinement coarser than the resonance width), in
    /// which case only the well-region samples are meaningful.
    pub contrast: f64,
}

/// Output grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Samples across the well region.
    pub well_points: usize,
    /// Samples across each flank.
    pub flank_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            well_points: 2001,
            flank_points: 200,
        }
    }
}

/// Bound-solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Resonance search window; `None` picks [`default_window`].
    pub e_window: Option<(f64, f64)>,
    /// Energy tolerance of the resonance refinement.
    pub tol_e: f64,
    /// Grid size of the first scan pass.
    pub initial_points: usize,
    pub detector: Detector,
    pub grid: GridSpec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            e_window: None,
            tol_e: 1e-12,
            initial_points: 1500,
            detector: Detector::A1Dip,
            grid: GridSpec::default(),
        }
    }
}

/// Errors from the bound-state pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundError {
    Profile(ProfileError),
    Spectra(SpectraError),
    Solver(SolverError),
    /// Neither the real nor the imaginary part carries weight in the well;
    /// the resonance wave does not resemble a bound state.
    VanishingParts { index: usize },
    /// The candidate eigenfunction has (numerically) zero norm.
    ZeroNorm { index: usize },
}

impl core::fmt::Display for BoundError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BoundError::Profile(e) => write!(f, "{e}"),
            BoundError::Spectra(e) => write!(f, "{e}"),
            BoundError::Solver(e) => write!(f, "{e}"),
            BoundError::VanishingParts { index } => write!(
                f,
                "state {index}: resonance wave carries no weight in the well"
            ),
            BoundError::ZeroNorm { index } => {
                write!(f, "state {index}: eigenfunction has zero norm")
            }
        }
    }
}

impl core::error::Error for BoundError {}

impl From<ProfileError> for BoundError {
    fn from(e: ProfileError) -> Self {
        BoundError::Profile(e)
    }
}

impl From<SpectraError> for BoundError {
    fn from(e: SpectraError) -> Self {
        BoundError::Spectra(e)
    }
}

impl From<SolverError> for BoundError {
    fn from(e: SolverError) -> Self {
        BoundError::Solver(e)
    }
}

/// Bound spectrum plus search diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSolve {
    /// States in ascending energy order.
    pub states: Vec<BoundState>,
    /// Scan passes the adaptive resonance search took.
    pub passes: usize,
    /// Whether consecutive scan passes agreed on the state count.
    pub converged: bool,
    /// Window-edge minima that could not be bracketed.
    pub skipped_edges: Vec<f64>,
}

/// Default resonance window for a model profile: from 0.5 up to the lower of
/// the two outermost barrier heights (quasi-bound levels live below the
/// confining walls).
pub fn default_window(profile: &StepProfile) -> (f64, f64) {
    let v = profile.values();
    let top = match (v.first(), v.last()) {
        (Some(&a), Some(&b)) => a.min(b),
        _ => 0.0,
    };
    (0.5, top)
}

/// Solves an uplifted model profile for its quasi-bound states and converts
/// them back to bound states of the underlying well.
pub fn solve_model(
    profile: &StepProfile,
    uplift: f64,
    well_region: (f64, f64),
    cfg: &SolveConfig,
) -> Result<BoundSolve, BoundError> {
    let (emin, emax) = cfg.e_window.unwrap_or_else(|| default_window(profile));
    let found = find_resonances_adaptive(
        profile,
        emin,
        emax,
        cfg.initial_points,
        cfg.detector,
        cfg.tol_e,
    )?;
    let mut states = Vec::with_capacity(found.search.resonances.len());
    for (index, r) in found.search.resonances.iter().enumerate() {
        states.push(extract_state(
            profile,
            index,
            r.energy,
            uplift,
            well_region,
            &cfg.grid,
        )?);
    }
    Ok(BoundSolve {
        states,
        passes: found.passes,
        converged: found.converged,
        skipped_edges: found.search.skipped_edges,
    })
}

/// Raises a well into a barrier-enclosed model, discretizes it, and solves
/// for the bound states.
pub fn solve_well(
    well: SmoothPotential,
    uplift: f64,
    flank_width: f64,
    rule: &DiscretizationRule,
    cfg: &SolveConfig,
) -> Result<BoundSolve, BoundError> {
    let model = uplift_model(well, uplift, flank_width)?;
    let total_uplift = model.uplift();
    let well_region = model
        .well_region()
        .expect("uplift_model always records the well region");
    let profile = discretize(&model, rule)?;
    solve_model(&profile, total_uplift, well_region, cfg)
}

/// Output grid: `flank_points` per flank plus `well_points` across the well,
/// duplicates at the seams removed.
fn make_grid(profile: &StepProfile, well_region: (f64, f64), spec: &GridSpec) -> Vec<f64> {
    let (lo, hi) = well_region;
    let left = profile.left_edge();
    let right = profile.right_edge();
    let mut grid = Vec::new();
    let mut extend = |a: f64, b: f64, n: usize| {
        if !(b > a) || n == 0 {
            return;
        }
        let start = if grid.last().is_some_and(|&g| g >= a) { 1 } else { 0 };
        for i in start..=n {
            grid.push(a + (b - a) * (i as f64 / n as f64));
        }
    };
    extend(left, lo, spec.flank_points);
    extend(lo.max(left), hi.min(right), spec.well_points.max(2) - 1);
    extend(hi, right, spec.flank_points);
    grid
}

fn extract_state(
    profile: &StepProfile,
    index: usize,
    resonance_energy: f64,
    uplift: f64,
    well_region: (f64, f64),
    spec: &GridSpec,
) -> Result<BoundState, BoundError> {
    let ev = WaveEvaluator::new(profile, resonance_energy)?;
    let grid = make_grid(profile, well_region, spec);
    if grid.len() < 2 {
        return Err(BoundError::ZeroNorm { index });
    }

    // Work in log form, then rescale so the largest well sample is O(1);
    // the overall scale is fixed by normalization anyway and the raw
    // scattering wave can overflow under opaque flanks. Flank samples may
    // legitimately sit far above the well scale (incident-side artifact),
    // so their exponent is clamped to stay finite.
    let (lo, hi) = well_region;
    let in_well = |x: f64| lo <= x && x <= hi;
    let log_psi: Vec<_> = grid.iter().map(|&x| ev.log_psi(x)).collect();
    let max_re = grid
        .iter()
        .zip(&log_psi)
        .filter(|(x, _)| in_well(**x))
        .map(|(_, c)| c.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_re.is_finite() {
        return Err(BoundError::ZeroNorm { index });
    }

    // At resonance the wave is a standing wave times a global phase plus an
    // O(width) traveling correction, so the real and imaginary parts are
    // both multiples of the eigenfunction; the larger one (over the well)
    // carries the smaller relative contamination.
    let mut re_l2 = 0.0;
    let mut im_l2 = 0.0;
    let mut vals = Vec::with_capacity(grid.len());
    for (x, lp) in grid.iter().zip(&log_psi) {
        let mut shifted = *lp - max_re;
        shifted.re = shifted.re.min(700.0);
        let v = shifted.exp();
        if in_well(*x) {
            re_l2 += v.re * v.re;
            im_l2 += v.im * v.im;
        }
        vals.push(v);
    }
    if re_l2.max(im_l2) < 1e-16 {
        return Err(BoundError::VanishingParts { index });
    }
    let part_used = if re_l2 >= im_l2 {
        Part::Real
    } else {
        Part::Imaginary
    };
    let mut psi: Vec<f64> = vals
        .iter()
        .map(|v| match part_used {
            Part::Real => v.re,
            Part::Imaginary => v.im,
        })
        .collect();

    // Trapezoid normalization over the well region.
    let mut norm_sq = 0.0;
    for i in 1..grid.len() {
        if in_well(grid[i - 1]) && in_well(grid[i]) {
            let dx = grid[i] - grid[i - 1];
            norm_sq += 0.5 * dx * (psi[i] * psi[i] + psi[i - 1] * psi[i - 1]);
        }
    }
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(BoundError::ZeroNorm { index });
    }
    let inv = norm_sq.sqrt().recip();
    for v in &mut psi {
        *v *= inv;
    }

    // Well-region statistics: peak (for the sign convention and the node
    // floor), node count, mass split, and the in/out contrast.
    let mut peak = 0.0f64;
    let mut flank_peak = 0.0f64;
    for (x, v) in grid.iter().zip(&psi) {
        if in_well(*x) {
            if v.abs() > peak.abs() {
                peak = *v;
            }
        } else {
            flank_peak = flank_peak.max(v.abs());
        }
    }
    if peak < 0.0 {
        for v in &mut psi {
            *v = -*v;
        }
    }
    let peak_abs = peak.abs();
    let contrast = if flank_peak > 0.0 {
        peak_abs / flank_peak
    } else {
        f64::INFINITY
    };

    let mut node_count = 0;
    let mut last_sign = 0.0f64;
    let mut left_mass = 0.0;
    let mut total_mass = 0.0;
    let mid = 0.5 * (lo + hi);
    for (x, v) in grid.iter().zip(&psi) {
        if !in_well(*x) {
            continue;
        }
        if v.abs() > NODE_AMPLITUDE_FLOOR * peak_abs {
            let s = v.signum();
            if last_sign != 0.0 && s != last_sign {
                node_count += 1;
            }
            last_sign = s;
        }
        let m = v * v;
        total_mass += m;
        if *x < mid {
            left_mass += m;
        }
    }
    let frac = left_mass / total_mass;
    let localization = if frac >= LOCALIZATION_FRACTION {
        Localization::Left
    } else if frac <= 1.0 - LOCALIZATION_FRACTION {
        Localization::Right
    } else {
        Localization::Delocalized
    };

    Ok(BoundState {
        index,
        eigenvalue: resonance_energy - uplift,
        resonance_energy,
        part_used,
        node_count,
        localization,
        grid,
        psi,
        well_region,
        contrast,
    })
}
