//! Finite-difference self-checks of the analytic solutions.
//!
//! These re-derive, numerically and without reusing any solver internals,
//! the defining properties of the computed objects: the wave function must be
//! `C^1` across layer boundaries and satisfy the stationary equation inside
//! layers, and the cutoff reflection amplitude must satisfy its first-order
//! flow equation in the cut position. All defects are returned as relative
//! quantities against natural local scales, so "small" means the same thing
//! in opaque and transparent regions.

use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::profile::StepProfile;
use crate::recursion::{
    compute_coefficients, cutoff_reflection_at, SolverError, WaveEvaluator,
};

/// Wave-function smoothness defects across layer boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    /// Largest mismatch of one-sided quadratic extrapolations of `psi`
    /// against its value at a boundary, relative to the local envelope
    /// (which keeps the statistic well conditioned at nodes of `psi`).
    pub max_psi_defect: f64,
    /// Largest mismatch of one-sided three-point derivatives across a
    /// boundary, relative to `k` times the local envelope or the
    /// derivatives themselves, whichever is larger.
    pub max_dpsi_defect: f64,
    /// Number of boundaries checked.
    pub boundaries: usize,
}

impl fmt::Display for ContinuityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} boundaries: max psi defect {:.3e}, max psi' defect {:.3e}",
            self.boundaries, self.max_psi_defect, self.max_dpsi_defect
        )
    }
}

/// Checks `psi` and `psi'` continuity at every breakpoint with one-sided
/// stencils of spacing `h`.
pub fn boundary_continuity(
    profile: &StepProfile,
    e: f64,
    h: f64,
) -> Result<ContinuityReport, SolverError> {
    let ev = WaveEvaluator::new(profile, e)?;
    let k = ev.energy().k();
    let mut report = ContinuityReport {
        max_psi_defect: 0.0,
        max_dpsi_defect: 0.0,
        boundaries: 0,
    };
    for &b in profile.breakpoints() {
        let pm = |i: i32| ev.psi(b + i as f64 * h);
        let at = pm(0);
        // Quadratic extrapolation to the boundary from strictly one-sided
        // samples; neither uses the boundary value itself.
        let from_left = 3.0 * pm(-1) - 3.0 * pm(-2) + pm(-3);
        let from_right = 3.0 * pm(1) - 3.0 * pm(2) + pm(3);
        let env = ev.log_envelope(b).exp();
        let scale = env
            .max(at.norm())
            .max(from_left.norm())
            .max(from_right.norm());
        if scale > 1e-280 {
            let defect = (from_left - at).norm().max((from_right - at).norm()) / scale;
            report.max_psi_defect = report.max_psi_defect.max(defect);
        }
        // Strictly one-sided third-order derivatives meeting at the
        // boundary. Neither stencil uses the boundary sample itself, so the
        // (sub-1e-9) value step between the two layer representations cannot
        // reappear divided by h as a spurious slope defect.
        let d_left =
            (26.0 * pm(-1) - 57.0 * pm(-2) + 42.0 * pm(-3) - 11.0 * pm(-4)) / (6.0 * h);
        let d_right =
            (-26.0 * pm(1) + 57.0 * pm(2) - 42.0 * pm(3) + 11.0 * pm(4)) / (6.0 * h);
        let d_scale = d_left.norm().max(d_right.norm()).max(k * env);
        if d_scale > 1e-280 {
            report.max_dpsi_defect = report
                .max_dpsi_defect
                .max((d_left - d_right).norm() / d_scale);
        }
        report.boundaries += 1;
    }
    Ok(report)
}

/// Largest relative residual of `psi'' + (E - V) psi = 0` over interior
/// sample points (central second difference of spacing `h`,
/// `samples_per_layer` points per layer, layers too thin for the stencil
/// skipped). Residuals are taken relative to the local envelope times the
/// equation's coefficient scale `max(|E - V|, E)`.
pub fn max_schroedinger_residual(
    profile: &StepProfile,
    e: f64,
    h: f64,
    samples_per_layer: usize,
) -> Result<f64, SolverError> {
    let ev = WaveEvaluator::new(profile, e)?;
    let mut worst = 0.0f64;
    for j in 0..profile.layer_count() {
        let (a, b) = (profile.breakpoints()[j], profile.breakpoints()[j + 1]);
        let margin = (3.0 * h).max(0.05 * (b - a));
        if b - a <= 2.0 * margin {
            continue;
        }
        let v = profile.values()[j];
        for i in 0..samples_per_layer {
            let t = (i as f64 + 0.5) / samples_per_layer as f64;
            let x = (a + margin) + (b - a - 2.0 * margin) * t;
            let psi = ev.psi(x);
            let dd = (ev.psi(x + h) + ev.psi(x - h) - 2.0 * psi) / (h * h);
            let residual = dd + (e - v) * psi;
            // Scale by the local envelope rather than |psi| itself: at nodes
            // of psi the pointwise ratio measures rounding of the two
            // envelope-sized components, not the quality of the solution.
            let env = ev.log_envelope(x).exp();
            let scale = (env * (e - v).abs().max(e)).max(dd.norm());
            if scale > 1e-280 {
                worst = worst.max(residual.norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// Largest relative residual of the cutoff-reflection flow equation
/// `dR/dx = -(V / 2ik) (e^{ikx} + e^{-ikx} R)^2` over interior sample points
/// (central first difference of spacing `h`).
pub fn max_riccati_residual(
    profile: &StepProfile,
    e: f64,
    h: f64,
    samples_per_layer: usize,
) -> Result<f64, SolverError> {
    let coeffs = compute_coefficients(profile, e)?;
    let k = coeffs.energy().k();
    let two_ik = Complex64::new(0.0, 2.0 * k);
    let mut worst = 0.0f64;
    for j in 0..profile.layer_count() {
        let (a, b) = (profile.breakpoints()[j], profile.breakpoints()[j + 1]);
        let margin = (3.0 * h).max(0.05 * (b - a));
        if b - a <= 2.0 * margin {
            continue;
        }
        let v = profile.values()[j];
        for i in 0..samples_per_layer {
            let t = (i as f64 + 0.5) / samples_per_layer as f64;
            let x = (a + margin) + (b - a - 2.0 * margin) * t;
            let r = cutoff_reflection_at(profile, &coeffs, x);
            let d = (cutoff_reflection_at(profile, &coeffs, x + h)
                - cutoff_reflection_at(profile, &coeffs, x - h))
                / (2.0 * h);
            let up = Complex64::new(0.0, k * x).exp();
            let wave = up + r / up;
            let rhs = -(v / two_ik) * wave * wave;
            let scale = d.norm().max(rhs.norm()).max(k);
            worst = worst.max((d - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model() -> StepProfile {
        StepProfile::new(
            vec![-2.0, -1.0, 0.0, 0.5, 2.0, 3.0],
            vec![4.0, -1.5, 7.0, 0.0, 2.5],
        )
        .unwrap()
    }

    #[test]
    fn analytic_solution_passes_its_own_checks() {
        for e in [0.4, 1.7, 5.2, 12.0] {
            let c = boundary_continuity(&model(), e, 1e-5).unwrap();
            assert!(c.max_psi_defect < 1e-8, "psi defect {c} at e={e}");
            assert!(c.max_dpsi_defect < 1e-8, "psi' defect {c} at e={e}");
            let s = max_schroedinger_residual(&model(), e, 1e-4, 16).unwrap();
            assert!(s < 1e-6, "schroedinger residual {s} at e={e}");
            let r = max_riccati_residual(&model(), e, 1e-5, 16).unwrap();
            assert!(r < 1e-6, "riccati residual {r} at e={e}");
        }
    }

    #[test]
    fn residual_statistic_detects_a_wrong_solution() {
        // Negative control: the solution of the true profile, measured
        // against a perturbed layer value, must show a residual many orders
        // above the one the consistent value produces at the same point.
        let good = model();
        let e = 1.7;
        let ev = WaveEvaluator::new(&good, e).unwrap();
        let (x, h) = (0.25, 1e-4);
        let psi = ev.psi(x);
        let dd = (ev.psi(x + h) + ev.psi(x - h) - 2.0 * psi) / (h * h);
        let env = ev.log_envelope(x).exp();
        let rel = |v: f64| {
            let residual = dd + (e - v) * psi;
            let scale = (env * (e - v).abs().max(e)).max(dd.norm());
            residual.norm() / scale
        };
        let consistent = rel(good.value_at(x));
        let corrupted = rel(good.value_at(x) + 3.0);
        assert!(
            corrupted > 0.05 && corrupted > 1e5 * consistent,
            "corrupted {corrupted} should dwarf consistent {consistent}"
        );
    }
}
