//! Deterministic text formats: CSV tables, JSON records, gnuplot companions.
//!
//! Every floating-point value is written losslessly — CSV cells use 17
//! significant digits, JSON numbers use the shortest round-trip form — and
//! nothing here depends on time, locale, or thread schedule, so identical
//! inputs produce byte-identical files.

use std::fmt::Write as _;

use qsolve_core::bound::{BoundSolve, BoundState};
use qsolve_core::profile::StepProfile;
use qsolve_core::spectra::Spectrum;
use qsolve_core::Complex64;
use serde::Serialize;

/// One `f64` at 17 significant digits; parsing the text recovers the exact
/// bit pattern.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Spectrum CSV: header `E,P_T,ln_PT,ln_abs_A1`, one row per grid point.
pub fn transmit_csv(s: &Spectrum) -> String {
    let mut out = String::with_capacity(32 + 96 * s.len());
    out.push_str("E,P_T,ln_PT,ln_abs_A1\n");
    for i in 0..s.len() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            s.energies()[i],
            s.p_t(i),
            s.ln_p_t()[i],
            s.ln_a1()[i],
        );
    }
    out
}

/// Wave-function CSV: header `x,re_psi,im_psi,abs_psi`, one row per position.
pub fn wavefunction_csv(xs: &[f64], psis: &[Complex64]) -> String {
    assert_eq!(xs.len(), psis.len());
    let mut out = String::with_capacity(32 + 96 * xs.len());
    out.push_str("x,re_psi,im_psi,abs_psi\n");
    for (x, psi) in xs.iter().zip(psis) {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            x,
            psi.re,
            psi.im,
            psi.norm()
        );
    }
    out
}

/// Gnuplot companion for a spectrum CSV: transmission probability against
/// the left axis, `ln|A_1|` against the right one, so resonance peaks and
/// coefficient dips line up visually.
pub fn transmit_gnuplot(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'E'\n\
         set ylabel 'P_T'\n\
         set y2label 'ln|A_1|'\n\
         set ytics nomirror\n\
         set y2tics\n\
         plot '{csv_name}' using 1:2 with lines axes x1y1, '' using 1:4 with lines axes x1y2\n"
    )
}

/// Gnuplot companion for a wave-function CSV.
pub fn wavefunction_gnuplot(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'x'\n\
         plot '{csv_name}' using 1:4 with lines, '' using 1:2 with lines, '' using 1:3 with lines\n"
    )
}

/// JSON record of one bound state.
#[derive(Debug, Serialize)]
pub struct BoundStateRecord<'a> {
    pub index: usize,
    pub eigenvalue: f64,
    pub part_used: &'static str,
    pub node_count: usize,
    pub localization: &'static str,
    pub grid: &'a [f64],
    pub psi: &'a [f64],
}

impl<'a> From<&'a BoundState> for BoundStateRecord<'a> {
    fn from(s: &'a BoundState) -> Self {
        BoundStateRecord {
            index: s.index,
            eigenvalue: s.eigenvalue,
            part_used: s.part_used.as_str(),
            node_count: s.node_count,
            localization: s.localization.as_str(),
            grid: &s.grid,
            psi: &s.psi,
        }
    }
}

/// JSON list of bound-state records (a bare `[]` when there are none).
pub fn bound_states_json(states: &[BoundState]) -> String {
    let records: Vec<BoundStateRecord<'_>> = states.iter().map(Into::into).collect();
    let mut out = serde_json::to_string(&records).expect("plain records always serialize");
    out.push('\n');
    out
}

/// Human-readable summary of a bound solve, one row per state.
pub fn eigen_summary(solve: &BoundSolve) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5}  {:>24}  {:>24}  {:>9}  {:>5}  {:>12}  {:>9}",
        "index", "eigenvalue", "resonance", "part", "nodes", "localization", "contrast"
    );
    for s in &solve.states {
        let _ = writeln!(
            out,
            "{:>5}  {:>24.16e}  {:>24.16e}  {:>9}  {:>5}  {:>12}  {:>9.2e}",
            s.index,
            s.eigenvalue,
            s.resonance_energy,
            s.part_used.as_str(),
            s.node_count,
            s.localization.as_str(),
            s.contrast
        );
    }
    let _ = writeln!(
        out,
        "{} state(s); scan passes: {}; count converged: {}",
        solve.states.len(),
        solve.passes,
        solve.converged
    );
    out
}

#[derive(Serialize)]
struct ProfileJson<'a> {
    breakpoints: &'a [f64],
    values: &'a [f64],
}

/// Step-profile JSON: `{"breakpoints":[...],"values":[...]}`. Feeding the
/// text back as a potential file reproduces the profile bit for bit.
pub fn profile_json(p: &StepProfile) -> String {
    let mut out = serde_json::to_string(&ProfileJson {
        breakpoints: p.breakpoints(),
        values: p.values(),
    })
    .expect("plain arrays always serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsolve_core::spectra::sweep;

    #[test]
    fn float17_round_trips_exactly() {
        for v in [
            0.1,
            -1.0 / 3.0,
            std::f64::consts::PI,
            1.2345678912345678e-300,
            6.02214076e23,
            -0.0,
            5.0,
        ] {
            let back: f64 = float17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn profile_json_round_trips_bit_for_bit() {
        let p = StepProfile::new(
            vec![-1.0, 0.1 + 0.2, 1.0, 2.5],
            vec![1.0 / 3.0, -7.7e-11, 42.0],
        )
        .unwrap();
        let text = profile_json(&p);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let bp: Vec<f64> = v["breakpoints"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let vals: Vec<f64> = v["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let q = StepProfile::new(bp, vals).unwrap();
        assert_eq!(q.digest(), p.digest());
    }

    #[test]
    fn transmit_csv_shape() {
        let p = StepProfile::new(vec![0.0, 1.0], vec![2.0]).unwrap();
        let s = sweep(&p, 0.5, 4.0, 5).unwrap();
        let csv = transmit_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "E,P_T,ln_PT,ln_abs_A1");
        assert_eq!(lines.len(), 6);
        for row in &lines[1..] {
            assert_eq!(row.split(',').count(), 4);
        }
        let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, 0.5);
    }

    #[test]
    fn empty_bound_list_is_a_bare_json_array() {
        assert_eq!(bound_states_json(&[]), "[]\n");
    }
}
