//! Independent reference solvers used to cross-check the backward recursion.
//!
//! The transfer-matrix path here shares nothing with the recursion except the
//! result container: it works in the oscillatory basis `e^{+- i q x}` with
//! `q = sqrt(E - V)`, composes per-layer matrices left to right in local
//! layer coordinates, and keeps a separate accumulated log-scale so evanescent
//! layers of arbitrary opacity stay in range. Closed forms for the single
//! rectangular barrier provide a second, fully analytic anchor.

use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::profile::StepProfile;
use crate::recursion::{ScatteringResult, SolverError};

// Deliberate duplicate of the recursion's degeneracy policy (same constants,
// reimplemented) so the two paths solve at identical effective energies
// while sharing no solver code.
const DEGENERACY_EPS: f64 = 1e-12;
const MAX_NUDGES: usize = 8;

fn nudge(values: &[f64], e: f64) -> Result<f64, SolverError> {
    if !e.is_finite() || e <= 0.0 {
        return Err(SolverError::InvalidEnergy { e });
    }
    let mut e = e;
    for _ in 0..=MAX_NUDGES {
        match values
            .iter()
            .find(|&&v| v != 0.0 && (e - v).abs() <= DEGENERACY_EPS * v.abs().max(1.0))
        {
            None => return Ok(e),
            Some(&v) => e += 2.0 * DEGENERACY_EPS * v.abs().max(1.0),
        }
    }
    Err(SolverError::DegenerateEnergy { e })
}

/// Region wavenumber `q = sqrt(E - V)`, continued to `+i sqrt(V - E)` under
/// the barrier.
fn wavenumber(v: f64, e: f64) -> Complex64 {
    let d = e - v;
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// A 2x2 complex matrix with a factored-out scalar `exp(log_scale)`, so
/// products over many evanescent layers keep entries of order one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub log_scale: Complex64,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        TransferMatrix {
            m11: Complex64::ONE,
            m12: Complex64::ZERO,
            m21: Complex64::ZERO,
            m22: Complex64::ONE,
            log_scale: Complex64::ZERO,
        }
    }

    /// `self` applied after `inner` (matrix product `self * inner`).
    pub fn compose(&self, inner: &Self) -> Self {
        TransferMatrix {
            m11: self.m11 * inner.m11 + self.m12 * inner.m21,
            m12: self.m11 * inner.m12 + self.m12 * inner.m22,
            m21: self.m21 * inner.m11 + self.m22 * inner.m21,
            m22: self.m21 * inner.m12 + self.m22 * inner.m22,
            log_scale: self.log_scale + inner.log_scale,
        }
    }

    /// The determinant of the full (scale-restored) chain telescopes to
    /// exactly one; this returns `ln` of its computed magnitude, a numerical
    /// consistency diagnostic that should sit at roundoff level for profiles
    /// of moderate total opacity.
    pub fn ln_det_defect(&self) -> f64 {
        let det = self.m11 * self.m22 - self.m12 * self.m21;
        det.norm().ln() + 2.0 * self.log_scale.re
    }
}

impl fmt::Display for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] * exp({})",
            self.m11, self.m12, self.m21, self.m22, self.log_scale
        )
    }
}

/// Interface step with no propagation: amplitudes just rebalance by the
/// wavenumber ratio `rho = q_from / q_to`.
fn interface(rho: Complex64) -> TransferMatrix {
    TransferMatrix {
        m11: (1.0 + rho) / 2.0,
        m12: (1.0 - rho) / 2.0,
        m21: (1.0 - rho) / 2.0,
        m22: (1.0 + rho) / 2.0,
        log_scale: Complex64::ZERO,
    }
}

/// Step from a layer (wavenumber `q`, width `w`, amplitudes local to its left
/// edge) into the next region (`q_next`, local to the shared boundary). The
/// growing half-phase `e^{-i q w}` is factored into `log_scale`; the retained
/// entries carry only `e^{2 i q w}`, which never grows.
fn layer_step(q: Complex64, w: f64, q_next: Complex64) -> TransferMatrix {
    let rho = q / q_next;
    let grow = Complex64::new(0.0, 2.0) * q * w;
    let phase2 = grow.exp();
    TransferMatrix {
        m11: (1.0 + rho) / 2.0 * phase2,
        m12: (1.0 - rho) / 2.0,
        m21: (1.0 - rho) / 2.0 * phase2,
        m22: (1.0 + rho) / 2.0,
        log_scale: Complex64::new(0.0, -1.0) * q * w,
    }
}

/// Full scaled chain for the profile: exit amplitudes = `e^{log_scale} M x`
/// entry amplitudes (local coordinates at the outer breakpoints).
pub fn transfer_chain(profile: &StepProfile, e: f64) -> Result<TransferMatrix, SolverError> {
    let e = nudge(profile.values(), e)?;
    let k = e.sqrt();
    let vals = profile.values();
    let n = vals.len();
    let k_c = Complex64::new(k, 0.0);

    let mut chain = interface(k_c / wavenumber(vals[0], e));
    for j in 0..n {
        let q = wavenumber(vals[j], e);
        let q_next = if j + 1 < n {
            wavenumber(vals[j + 1], e)
        } else {
            k_c
        };
        chain = layer_step(q, profile.width(j), q_next).compose(&chain);
    }
    Ok(chain)
}

/// Transfer-matrix evaluation of the same amplitudes the recursion produces.
pub fn tm_scatter(profile: &StepProfile, e: f64) -> Result<ScatteringResult, SolverError> {
    let e_n = nudge(profile.values(), e)?;
    let k = e_n.sqrt();
    let chain = transfer_chain(profile, e)?;
    if chain.m22 == Complex64::ZERO {
        return Err(SolverError::PoleAt {
            layer: profile.layer_count() - 1,
            e,
        });
    }
    let r0 = -chain.m21 / chain.m22;
    let b0 = profile.left_edge();
    let bn = profile.right_edge();
    let r = r0 * Complex64::new(0.0, 2.0 * k * b0).exp();
    // The exact determinant identity det = e^{-2 log_scale} replaces the
    // numerically cancellation-prone det evaluation in T = det / m22.
    let log_t = -chain.log_scale - chain.m22.ln() + Complex64::new(0.0, k * (b0 - bn));

    // First-layer coefficient ratio, converted from the local oscillatory
    // amplitudes (a1, b1) at the left edge to the recursion's normalization.
    // For a layer above the energy the growing/decaying roles belong to
    // (b1, a1); below, the basis is oscillatory and the ratio flips, while a
    // modulus factor |q - k| / (q + k) carries the normalization difference.
    let ln_a1 = if profile.is_zero() {
        0.0
    } else {
        let v1 = profile.values()[0];
        let q1 = wavenumber(v1, e_n);
        let rho0 = k_over(k, q1);
        let a1 = (1.0 + rho0) / 2.0 + (1.0 - rho0) / 2.0 * r0;
        let b1 = (1.0 - rho0) / 2.0 + (1.0 + rho0) / 2.0 * r0;
        if v1 > e_n {
            let p = (v1 - e_n).sqrt();
            a1.norm().ln() - b1.norm().ln() + 2.0 * p * b0
        } else {
            let q = q1.re;
            b1.norm().ln() - a1.norm().ln() + ((q - k).abs() / (q + k)).ln()
        }
    };

    Ok(ScatteringResult { r, log_t, ln_a1 })
}

fn k_over(k: f64, q: Complex64) -> Complex64 {
    Complex64::new(k, 0.0) / q
}

fn sinhc(z: f64) -> f64 {
    if z.abs() > 1e-4 {
        z.sinh() / z
    } else {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    }
}

fn sinc(z: f64) -> f64 {
    if z.abs() > 1e-4 {
        z.sin() / z
    } else {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    }
}

/// Closed-form transmission amplitude of a single rectangular layer of value
/// `v` on `[0, width]` at energy `e > 0`:
/// `T = e^{-ikw} / (cosh(pw) + i (p^2 - k^2) sinh(pw) / (2kp))`,
/// `p = sqrt(v - e)`. Overflows gracefully to zero for very opaque layers.
pub fn single_barrier_t(v: f64, width: f64, e: f64) -> Complex64 {
    let k = e.sqrt();
    let p = if v >= e {
        Complex64::new((v - e).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (e - v).sqrt())
    };
    let pw = p * width;
    let cosh = (pw.exp() + (-pw).exp()) / 2.0;
    let sinh = (pw.exp() - (-pw).exp()) / 2.0;
    let den = cosh + Complex64::new(0.0, 1.0) * (p * p - k * k) * sinh / (2.0 * k * p);
    Complex64::new(0.0, -k * width).exp() / den
}

/// Closed-form transmission probability of the same layer, written with
/// `sinhc`/`sinc` so it is finite-difference-free, continuous, and full
/// precision across the `e = v` degeneracy:
/// `P_T = 1 / (1 + v^2 w^2 u / (4e))` with `u = sinhc^2(kappa w)` under the
/// layer top and `sinc^2(q w)` above it (`u = 1` exactly at the top).
pub fn single_barrier_pt(v: f64, width: f64, e: f64) -> f64 {
    let u = if v > e {
        let s = sinhc((v - e).sqrt() * width);
        s * s
    } else {
        let s = sinc((e - v).sqrt() * width);
        s * s
    };
    1.0 / (1.0 + v * v * width * width * u / (4.0 * e))
}
