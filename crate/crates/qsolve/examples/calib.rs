use qsolve_core::profile::{builtin, discretize, DiscretizationRule, Potential, SmoothPotential};
use qsolve_core::recursion::scatter;
use qsolve_core::spectra::{find_resonances, sweep, Detector};

fn smooth(name: &str) -> SmoothPotential {
    match builtin(name, &[]).unwrap() {
        Potential::Smooth(s) => s,
        Potential::Step(_) => unreachable!(),
    }
}

fn main() {
    let asym = smooth("asym_double_well_model");
    let prof = discretize(
        &asym,
        &DiscretizationRule {
            segments: 6000,
            ..DiscretizationRule::default()
        },
    )
    .unwrap();

    for (lo, hi) in [(5.4, 5.8), (7.4, 7.8), (18.0, 19.0), (16.0, 17.0)] {
        let s = sweep(&prof, lo, hi, 2001).unwrap();
        let y = s.ln_a1();
        let e = s.energies();
        let n = y.len();
        let mut minima = Vec::new();
        for i in 1..n - 1 {
            if y[i] < y[i - 1] && y[i] < y[i + 1] {
                minima.push(i);
            }
        }
        println!(
            "window ({lo},{hi}): {} strict ln|A1| minima; ln_a1 range [{:.3}, {:.3}]",
            minima.len(),
            y.iter().cloned().fold(f64::INFINITY, f64::min),
            y.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        );
        for &i in minima.iter().take(6) {
            println!(
                "  min at E={:.9}: y={:.4} (nbrs {:.4}, {:.4}), ln_p_t here {:.3}",
                e[i],
                y[i],
                y[i - 1],
                y[i + 1],
                s.ln_p_t()[i]
            );
        }
        let dips = find_resonances(&prof, &s, Detector::A1Dip, 1e-12).unwrap();
        let peaks = find_resonances(&prof, &s, Detector::PtPeak, 1e-12).unwrap();
        println!(
            "  find_resonances: A1Dip {:?}, PtPeak {:?}",
            dips.resonances.iter().map(|r| r.energy).collect::<Vec<_>>(),
            peaks.resonances.iter().map(|r| r.energy).collect::<Vec<_>>()
        );
    }

    // Same spots at pass-1 resolution over the full default window.
    let s = sweep(&prof, 0.5, 64.0006, 1500).unwrap();
    let y = s.ln_a1();
    let e = s.energies();
    let mut minima = Vec::new();
    for i in 1..y.len() - 1 {
        if y[i] < y[i - 1] && y[i] < y[i + 1] {
            minima.push(e[i]);
        }
    }
    println!("full-window pass-1 strict minima ({}): {minima:.3?}", minima.len());

    // What does ln_a1 look like pointwise around the known E_0?
    for e in [5.6017, 5.6018, 5.60184, 5.601849, 5.6019, 5.602] {
        let r = scatter(&prof, e).unwrap();
        println!("  E={e}: ln_a1 = {:.6}, ln_p_t = {:.3}", r.ln_a1, r.ln_p_t());
    }
}
