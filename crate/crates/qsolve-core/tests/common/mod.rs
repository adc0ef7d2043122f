//! Deterministic random-profile corpus shared by the integration tests.

use qsolve_core::profile::StepProfile;
use rand::distributions::Uniform;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// One sampled profile with its probe energies.
pub struct Case {
    pub profile: StepProfile,
    pub energies: Vec<f64>,
}

/// Seeded corpus: `count` profiles of up to 50 layers, |V| <= 100, widths in
/// [1e-3, 10] (log-uniform), left edge in [-20, 20], each probed at
/// `energies_per` log-uniform energies in [1e-2, 2e2].
pub fn corpus(seed: u64, count: usize, energies_per: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layer_count = Uniform::new_inclusive(1usize, 50);
    let value = Uniform::new_inclusive(-100.0f64, 100.0);
    let log_width = Uniform::new(1e-3f64.ln(), 10.0f64.ln());
    let left = Uniform::new_inclusive(-20.0f64, 20.0);
    let log_e = Uniform::new(1e-2f64.ln(), 2e2f64.ln());

    (0..count)
        .map(|_| {
            let n = layer_count.sample(&mut rng);
            let mut breakpoints = Vec::with_capacity(n + 1);
            breakpoints.push(left.sample(&mut rng));
            let mut values = Vec::with_capacity(n);
            for j in 0..n {
                let w = log_width.sample(&mut rng).exp();
                breakpoints.push(breakpoints[j] + w);
                values.push(value.sample(&mut rng));
            }
            let profile = StepProfile::new(breakpoints, values).expect("corpus profile is valid");
            let energies = (0..energies_per)
                .map(|_| log_e.sample(&mut rng).exp())
                .collect();
            Case { profile, energies }
        })
        .collect()
}

/// Moderate single layers for closed-form probability checks: value in
/// [-50, 50] away from zero, width in [0.1, 3], energy log-uniform in
/// [5e-2, 1e2], filtered to total opacity p*w <= 30.
pub fn moderate_barriers(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let value = Uniform::new_inclusive(-50.0f64, 50.0);
    let width = Uniform::new(0.1f64, 3.0);
    let log_e = Uniform::new(5e-2f64.ln(), 1e2f64.ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = value.sample(&mut rng);
        let w = width.sample(&mut rng);
        let e = log_e.sample(&mut rng).exp();
        if v.abs() < 0.5 {
            continue;
        }
        let opacity = if v > e { (v - e).sqrt() * w } else { 0.0 };
        if opacity > 30.0 {
            continue;
        }
        out.push((v, w, e));
    }
    out
}
