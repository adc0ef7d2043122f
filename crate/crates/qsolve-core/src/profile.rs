//! Potential profiles: piecewise-constant layers, smooth potentials with
//! finite support, discretization, and the built-in model potentials.
//!
//! A [`StepProfile`] holds `n >= 1` constant layers between strictly
//! increasing breakpoints and is identically zero outside them. Profiles are
//! canonical: values with magnitude below [`SNAP_EPS`] snap to exactly zero,
//! and zero-valued layers at either end are dropped (they are
//! indistinguishable from the environment). The solver relies on this
//! canonical form to route zero-valued layers onto their own closed-form
//! branch. Adjacent layers of equal value are legal and kept as given:
//! discretization is expected to return exactly the requested segmentation.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

/// Sampled values with magnitude below this snap to exactly zero so the
/// zero-layer branch of the recursion sees clean zeros.
pub const SNAP_EPS: f64 = 1e-14;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "rect_double_barrier",
    "gaussian_double_barrier",
    "harmonic_model",
    "double_well",
    "double_well_model",
    "asym_double_well_model",
];

/// Errors from profile construction, discretization, and model building.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    /// Breakpoint and value lists have incompatible lengths (need one more
    /// breakpoint than values, and at least one layer).
    Shape { breakpoints: usize, values: usize },
    /// Breakpoints must be strictly increasing.
    NonMonotonic { index: usize },
    /// A breakpoint or value is NaN or infinite.
    NonFinite { what: &'static str, index: usize },
    /// The evaluator returned a non-finite sample during discretization.
    NonFiniteSample { segment: usize, x: f64 },
    /// Smooth potential support is empty or inverted.
    EmptySupport,
    /// Discretization needs at least one segment.
    ZeroSegments,
    /// Unknown built-in potential name.
    UnknownBuiltin { name: String },
    /// Unknown parameter key for a built-in potential.
    UnknownParam { builtin: &'static str, key: String },
    /// The uplift does not raise the whole well to or above zero.
    InsufficientUplift { required: f64, given: f64 },
    /// The uplifted model has no positive barrier anywhere.
    NonPositiveBarrier,
    /// Flank width must be positive and finite.
    BadFlank { width: f64 },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::Shape {
                breakpoints,
                values,
            } => write!(
                f,
                "need breakpoints = values + 1 with at least one layer, got {breakpoints} breakpoints and {values} values"
            ),
            ProfileError::NonMonotonic { index } => {
                write!(f, "breakpoints must be strictly increasing at index {index}")
            }
            ProfileError::NonFinite { what, index } => {
                write!(f, "non-finite {what} at index {index}")
            }
            ProfileError::NonFiniteSample { segment, x } => {
                write!(f, "potential sample is not finite in segment {segment} near x = {x}")
            }
            ProfileError::EmptySupport => write!(f, "support interval is empty"),
            ProfileError::ZeroSegments => write!(f, "discretization needs at least one segment"),
            ProfileError::UnknownBuiltin { name } => {
                write!(f, "unknown builtin potential '{name}'; valid names: {}", BUILTIN_NAMES.join(", "))
            }
            ProfileError::UnknownParam { builtin, key } => {
                write!(f, "unknown parameter '{key}' for builtin '{builtin}'")
            }
            ProfileError::InsufficientUplift { required, given } => write!(
                f,
                "uplift {given} is below the well depth; need at least {required} to raise the well to zero"
            ),
            ProfileError::NonPositiveBarrier => {
                write!(f, "uplifted model has no positive barrier")
            }
            ProfileError::BadFlank { width } => write!(f, "flank width must be positive, got {width}"),
        }
    }
}

impl core::error::Error for ProfileError {}

/// A piecewise-constant potential: `values[j]` on `[breakpoints[j], breakpoints[j+1])`,
/// zero outside `[first, last]` breakpoint. Always in canonical form (see module docs).
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepProfile {
    /// Builds a canonical profile from raw breakpoints and layer values.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, ProfileError> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() + 1 {
            return Err(ProfileError::Shape {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        for (i, b) in breakpoints.iter().enumerate() {
            if !b.is_finite() {
                return Err(ProfileError::NonFinite {
                    what: "breakpoint",
                    index: i,
                });
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ProfileError::NonFinite {
                    what: "value",
                    index: i,
                });
            }
        }
        for i in 1..breakpoints.len() {
            if breakpoints[i] <= breakpoints[i - 1] {
                return Err(ProfileError::NonMonotonic { index: i });
            }
        }

        let mut bp = breakpoints;
        let mut vals: Vec<f64> = values
            .iter()
            .map(|&raw| if raw.abs() < SNAP_EPS { 0.0 } else { raw })
            .collect();
        // Drop zero layers at the ends; keep one layer even if all-zero.
        while vals.len() > 1 && *vals.last().unwrap() == 0.0 {
            vals.pop();
            bp.pop();
        }
        while vals.len() > 1 && vals[0] == 0.0 {
            vals.remove(0);
            bp.remove(0);
        }
        Ok(StepProfile {
            breakpoints: bp,
            values: vals,
        })
    }

    /// Breakpoints `b_0 < b_1 < ... < b_n`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Layer values `V_1 ... V_n` (index 0 is the leftmost layer).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of layers `n >= 1`.
    pub fn layer_count(&self) -> usize {
        self.values.len()
    }

    /// Width of layer `j`.
    pub fn width(&self, j: usize) -> f64 {
        self.breakpoints[j + 1] - self.breakpoints[j]
    }

    /// Leftmost breakpoint `b_0`.
    pub fn left_edge(&self) -> f64 {
        self.breakpoints[0]
    }

    /// Rightmost breakpoint `b_n`.
    pub fn right_edge(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// True when every layer value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Largest layer value (zero for an all-zero profile).
    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v))
    }

    /// Index of the layer containing `x`; boundaries belong to the layer to
    /// their right, except the last breakpoint which belongs to the last
    /// layer. `None` outside `[b_0, b_n]`.
    pub fn layer_at(&self, x: f64) -> Option<usize> {
        if x < self.left_edge() || x > self.right_edge() {
            return None;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        Some(if i == 0 {
            0
        } else {
            (i - 1).min(self.values.len() - 1)
        })
    }

    /// Potential value at `x` (zero outside the profile).
    pub fn value_at(&self, x: f64) -> f64 {
        self.layer_at(x).map_or(0.0, |j| self.values[j])
    }

    /// FNV-1a digest over the exact bit patterns of breakpoints and values;
    /// identifies the profile in swept spectra.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut eat = |bits: u64| {
            for shift in [0u32, 8, 16, 24, 32, 40, 48, 56] {
                h ^= (bits >> shift) & 0xff;
                h = h.wrapping_mul(PRIME);
            }
        };
        for b in &self.breakpoints {
            eat(b.to_bits());
        }
        for v in &self.values {
            eat(v.to_bits());
        }
        h
    }
}

/// How a segment of a smooth potential is reduced to one constant value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Value of the evaluator at the segment midpoint.
    Midpoint,
    /// Simpson-weighted mean of the endpoint and midpoint values.
    Average,
}

/// Discretization settings for [`discretize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizationRule {
    /// Number of equal-width segments across the support.
    pub segments: usize,
    pub sampling: Sampling,
}

impl Default for DiscretizationRule {
    fn default() -> Self {
        DiscretizationRule {
            segments: 2000,
            sampling: Sampling::Midpoint,
        }
    }
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A potential given by an evaluator on a finite support, zero outside.
///
/// Models built by [`uplift_model`] or the model builtins also record the
/// total additive constant (`uplift`) that turned a well into a barrier
/// structure, and the sub-interval occupied by the well itself, so that
/// bound-state energies can be recovered exactly from resonance energies.
#[derive(Clone)]
pub struct SmoothPotential {
    support: (f64, f64),
    uplift: f64,
    well_region: Option<(f64, f64)>,
    eval: Evaluator,
}

// Evaluator closures have no useful Debug form; show the metadata only.
impl fmt::Debug for SmoothPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothPotential")
            .field("support", &self.support)
            .field("uplift", &self.uplift)
            .field("well_region", &self.well_region)
            .finish_non_exhaustive()
    }
}

impl SmoothPotential {
    /// Wraps an evaluator defined on `support` (the potential is zero outside).
    pub fn new(
        support: (f64, f64),
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, ProfileError> {
        if !(support.0.is_finite() && support.1.is_finite() && support.0 < support.1) {
            return Err(ProfileError::EmptySupport);
        }
        Ok(SmoothPotential {
            support,
            uplift: 0.0,
            well_region: None,
            eval: Arc::new(eval),
        })
    }

    /// Records the additive constant separating this model from the well it
    /// was built from.
    pub fn with_uplift(mut self, uplift: f64) -> Self {
        self.uplift = uplift;
        self
    }

    /// Records the sub-interval occupied by the well between the barriers.
    pub fn with_well_region(mut self, region: (f64, f64)) -> Self {
        self.well_region = Some(region);
        self
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn uplift(&self) -> f64 {
        self.uplift
    }

    pub fn well_region(&self) -> Option<(f64, f64)> {
        self.well_region
    }

    /// Evaluates the potential (zero outside the support).
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            0.0
        } else {
            (self.eval)(x)
        }
    }
}

/// Either kind of potential source.
#[derive(Debug, Clone)]
pub enum Potential {
    Step(StepProfile),
    Smooth(SmoothPotential),
}

impl Potential {
    /// Reduces to a step profile, discretizing smooth sources with `rule`.
    pub fn into_profile(self, rule: &DiscretizationRule) -> Result<StepProfile, ProfileError> {
        match self {
            Potential::Step(p) => Ok(p),
            Potential::Smooth(s) => discretize(&s, rule),
        }
    }
}

/// Reduces a smooth potential to `rule.segments` equal-width constant layers
/// across its support, keeping the requested segmentation as given (equal
/// adjacent values stay separate layers).
///
/// A piecewise-constant potential whose steps align with the segment grid is
/// reproduced exactly, value for value (midpoint sampling reads the constant
/// itself). Sampled magnitudes below [`SNAP_EPS`] snap to zero so the solver
/// routes those layers onto its zero-potential branch deterministically.
pub fn discretize(
    potential: &SmoothPotential,
    rule: &DiscretizationRule,
) -> Result<StepProfile, ProfileError> {
    if rule.segments == 0 {
        return Err(ProfileError::ZeroSegments);
    }
    let (lo, hi) = potential.support();
    let n = rule.segments;
    let w = (hi - lo) / n as f64;
    let mut breakpoints = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n);
    for i in 0..=n {
        // Exact endpoints; interior points on the uniform grid.
        let b = if i == n {
            hi
        } else {
            lo + w * i as f64
        };
        breakpoints.push(b);
    }
    for i in 0..n {
        let (a, b) = (breakpoints[i], breakpoints[i + 1]);
        let m = 0.5 * (a + b);
        let v = match rule.sampling {
            Sampling::Midpoint => potential.eval(m),
            Sampling::Average => {
                (potential.eval(a) + 4.0 * potential.eval(m) + potential.eval(b)) / 6.0
            }
        };
        if !v.is_finite() {
            return Err(ProfileError::NonFiniteSample { segment: i, x: m });
        }
        values.push(v);
    }
    StepProfile::new(breakpoints, values)
}

/// Turns a well into a scattering model: the well plus `uplift` on its
/// support, a constant barrier of height `uplift` on flanks of width
/// `flank_width` on both sides, zero beyond.
///
/// The returned potential records the accumulated uplift and the well region,
/// so a bound solve can subtract the constant exactly. The uplift must raise
/// the entire well to zero or above (quasi-bound energies must stay positive),
/// and the resulting model must have a positive barrier somewhere; an already
/// barrier-shaped potential may therefore pass `uplift = 0`.
pub fn uplift_model(
    well: SmoothPotential,
    uplift: f64,
    flank_width: f64,
) -> Result<SmoothPotential, ProfileError> {
    if !(flank_width.is_finite() && flank_width > 0.0) {
        return Err(ProfileError::BadFlank { width: flank_width });
    }
    if !uplift.is_finite() {
        return Err(ProfileError::NonFinite {
            what: "uplift",
            index: 0,
        });
    }
    let (lo, hi) = well.support();
    // The well evaluator is an arbitrary closure; bound its range by dense
    // sampling (endpoints included) to validate the uplift.
    let mut min_w = f64::INFINITY;
    let mut max_w = f64::NEG_INFINITY;
    const SAMPLES: usize = 4096;
    for i in 0..=SAMPLES {
        let x = lo + (hi - lo) * (i as f64 / SAMPLES as f64);
        let v = well.eval(x);
        if !v.is_finite() {
            return Err(ProfileError::NonFiniteSample { segment: i, x });
        }
        min_w = min_w.min(v);
        max_w = max_w.max(v);
    }
    if uplift + min_w < 0.0 {
        return Err(ProfileError::InsufficientUplift {
            required: -min_w,
            given: uplift,
        });
    }
    if uplift.max(uplift + max_w) <= 0.0 {
        return Err(ProfileError::NonPositiveBarrier);
    }
    let inherited = well.uplift();
    let inner = well.clone();
    let model = SmoothPotential::new((lo - flank_width, hi + flank_width), move |x| {
        if x < lo || x > hi {
            uplift
        } else {
            inner.eval(x) + uplift
        }
    })?;
    Ok(model
        .with_uplift(inherited + uplift)
        .with_well_region((lo, hi)))
}

fn take_params(
    builtin: &'static str,
    params: &[(&str, f64)],
    keys: &[(&str, f64)],
) -> Result<Vec<f64>, ProfileError> {
    for (k, _) in params {
        if !keys.iter().any(|(known, _)| known == k) {
            return Err(ProfileError::UnknownParam {
                builtin,
                key: k.to_string(),
            });
        }
    }
    Ok(keys
        .iter()
        .map(|(k, default)| {
            params
                .iter()
                .rev()
                .find(|(key, _)| key == k)
                .map_or(*default, |(_, v)| *v)
        })
        .collect())
}

/// Returns a named model potential. Parameters are `(key, value)` pairs;
/// unknown names and keys are errors.
///
/// Builtins:
/// - `rect_double_barrier`: two rectangular barriers, `height` (1) and
///   `width` (1) each, separated by `gap` (1), starting at `x0` (0).
/// - `gaussian_double_barrier`: `height` (1) Gaussians of width `sigma` (0.4)
///   centered at `+-center` (1.5), truncated at `+-(center + 5 sigma)`.
/// - `harmonic_model`: `x^2` for `|x| < a` (a = 4), constant `a^2` out to
///   `|x| = outer` (10); a truncated oscillator embedded between barriers.
/// - `double_well`: the quartic well `x^2 (x^2 - 16)` on `|x| < 4`.
/// - `double_well_model`: the quartic well raised by 64, with constant-64
///   flanks out to `|x| = 6`.
/// - `asym_double_well_model`: `double_well_model` plus `tanh x + 1`
///   (total uplift 65); the extra tilt splits every resonance pair.
pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<Potential, ProfileError> {
    match name {
        "rect_double_barrier" => {
            let p = take_params(
                "rect_double_barrier",
                params,
                &[("height", 1.0), ("width", 1.0), ("gap", 1.0), ("x0", 0.0)],
            )?;
            let (h, w, g, x0) = (p[0], p[1], p[2], p[3]);
            Ok(Potential::Step(StepProfile::new(
                alloc::vec![x0, x0 + w, x0 + w + g, x0 + 2.0 * w + g],
                alloc::vec![h, 0.0, h],
            )?))
        }
        "gaussian_double_barrier" => {
            let p = take_params(
                "gaussian_double_barrier",
                params,
                &[("height", 1.0), ("sigma", 0.4), ("center", 1.5)],
            )?;
            let (h, sigma, c) = (p[0], p[1], p[2]);
            let half = c + 5.0 * sigma;
            let smooth = SmoothPotential::new((-half, half), move |x| {
                let g = |u: f64| (-(u * u) / (2.0 * sigma * sigma)).exp();
                h * (g(x - c) + g(x + c))
            })?;
            Ok(Potential::Smooth(smooth))
        }
        "harmonic_model" => {
            let p = take_params("harmonic_model", params, &[("a", 4.0), ("outer", 10.0)])?;
            let (a, outer) = (p[0], p[1]);
            let smooth = SmoothPotential::new((-outer, outer), move |x| {
                if x.abs() < a {
                    x * x
                } else {
                    a * a
                }
            })?
            .with_well_region((-a, a));
            Ok(Potential::Smooth(smooth))
        }
        "double_well" => {
            take_params("double_well", params, &[])?;
            let smooth =
                SmoothPotential::new((-4.0, 4.0), |x| x * x * (x * x - 16.0))?;
            Ok(Potential::Smooth(smooth))
        }
        "double_well_model" => {
            take_params("double_well_model", params, &[])?;
            let smooth = SmoothPotential::new((-6.0, 6.0), |x| {
                if x.abs() < 4.0 {
                    x * x * (x * x - 16.0) + 64.0
                } else {
                    64.0
                }
            })?
            .with_uplift(64.0)
            .with_well_region((-4.0, 4.0));
            Ok(Potential::Smooth(smooth))
        }
        "asym_double_well_model" => {
            take_params("asym_double_well_model", params, &[])?;
            let smooth = SmoothPotential::new((-6.0, 6.0), |x| {
                let base = if x.abs() < 4.0 {
                    x * x * (x * x - 16.0) + 64.0
                } else {
                    64.0
                };
                base + x.tanh() + 1.0
            })?
            .with_uplift(65.0)
            .with_well_region((-4.0, 4.0));
            Ok(Potential::Smooth(smooth))
        }
        other => Err(ProfileError::UnknownBuiltin {
            name: other.to_string(),
        }),
    }
}
