//! End-to-end tests of the `qsolve` binary: flag handling, file formats,
//! exit codes, and the determinism / round-trip guarantees of the outputs.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qsolve"));
    // Keep ambient configuration out of the determinism tests.
    c.env_remove("QSOLVE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stderr).expect("stderr is UTF-8")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        stderr_of(out)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("terminated by exit")
}

/// Parses a CSV body (header + float rows) into rows of f64 columns.
fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("has a header").to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().expect("float field"))
                .collect()
        })
        .collect();
    (header, rows)
}

fn write_potential(dir: &TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn zero_potential_wave_is_the_incident_plane_wave() {
    let dir = TempDir::new().unwrap();
    let pot = write_potential(&dir, "zero.json", r#"{"expr": "0*x", "support": [-1, 1]}"#);
    let out = run(&[
        "wavefunction",
        "--potential",
        &pot,
        "--energy",
        "1",
        "--xmin",
        "-5",
        "--xmax",
        "5",
        "--points",
        "101",
        "--check",
    ]);
    assert_success(&out);
    assert!(
        stderr_of(&out).starts_with("check: "),
        "stderr: {}",
        stderr_of(&out)
    );
    let (header, rows) = parse_csv(stdout_of(&out));
    assert_eq!(header, "x,re_psi,im_psi,abs_psi");
    assert_eq!(rows.len(), 101);
    for row in &rows {
        let x = row[0];
        assert!((row[1] - x.cos()).abs() < 1e-12, "re at {x}");
        assert!((row[2] - x.sin()).abs() < 1e-12, "im at {x}");
        assert!((row[3] - 1.0).abs() < 1e-12, "abs at {x}");
    }
    assert_eq!(rows[0][0], -5.0);
    assert_eq!(rows[100][0], 5.0);
}

#[test]
fn zero_potential_transmits_everything() {
    let dir = TempDir::new().unwrap();
    let pot = write_potential(&dir, "zero.json", r#"{"expr": "0*x", "support": [-1, 1]}"#);
    let out = run(&[
        "transmit",
        "--potential",
        &pot,
        "--emin",
        "0.5",
        "--emax",
        "9.5",
        "--points",
        "19",
    ]);
    assert_success(&out);
    let (header, rows) = parse_csv(stdout_of(&out));
    assert_eq!(header, "E,P_T,ln_PT,ln_abs_A1");
    assert_eq!(rows.len(), 19);
    for row in &rows {
        assert_eq!(row[1], 1.0, "P_T at E = {}", row[0]);
        assert_eq!(row[2], 0.0, "ln P_T at E = {}", row[0]);
    }
}

#[test]
fn engines_agree_row_by_row() {
    let args_for = |engine: &str| {
        [
            "transmit",
            "--potential",
            "builtin:rect_double_barrier?height=30",
            "--emin",
            "0.5",
            "--emax",
            "29.5",
            "--points",
            "500",
            "--engine",
            engine,
        ]
        .map(String::from)
    };
    let rec = run(&args_for("recursive").iter().map(String::as_str).collect::<Vec<_>>());
    let tm = run(&args_for("tm").iter().map(String::as_str).collect::<Vec<_>>());
    assert_success(&rec);
    assert_success(&tm);
    let (_, rows_r) = parse_csv(stdout_of(&rec));
    let (_, rows_t) = parse_csv(stdout_of(&tm));
    assert_eq!(rows_r.len(), rows_t.len());
    for (r, t) in rows_r.iter().zip(&rows_t) {
        assert_eq!(r[0], t[0], "energy grids must match exactly");
        for col in 1..4 {
            let scale = r[col].abs().max(1.0);
            assert!(
                (r[col] - t[col]).abs() <= 1e-9 * scale,
                "col {col} at E = {}: {} vs {}",
                r[0],
                r[col],
                t[col]
            );
        }
    }
}

#[test]
fn transmission_peaks_align_with_first_layer_dips() {
    let out = run(&[
        "transmit",
        "--potential",
        "builtin:rect_double_barrier?height=30",
        "--emin",
        "0.5",
        "--emax",
        "29.5",
        "--points",
        "2000",
    ]);
    assert_success(&out);
    let (_, rows) = parse_csv(stdout_of(&out));
    let p_t: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let ln_a1: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let peaks: Vec<usize> = (1..rows.len() - 1)
        .filter(|&i| p_t[i] > p_t[i - 1] && p_t[i] > p_t[i + 1])
        .collect();
    assert_eq!(peaks.len(), 2, "two sub-barrier resonances expected");
    let is_dip = |j: usize| j > 0 && j + 1 < rows.len() && ln_a1[j] < ln_a1[j - 1] && ln_a1[j] < ln_a1[j + 1];
    for &i in &peaks {
        // The paired ln|A_1| dip sits within a couple of grid steps.
        assert!(
            (i.saturating_sub(2)..=(i + 2).min(rows.len() - 1)).any(is_dip),
            "no dip around peak at E = {}",
            rows[i][0]
        );
    }
}

#[test]
fn discretize_matches_the_contract_example() {
    let dir = TempDir::new().unwrap();
    let pot = write_potential(&dir, "sq.json", r#"{"expr": "x^2", "support": [-4, 4]}"#);
    let out = run(&["discretize", "--potential", &pot, "--segments", "4"]);
    assert_success(&out);
    assert_eq!(
        stdout_of(&out),
        "{\"breakpoints\":[-4.0,-2.0,0.0,2.0,4.0],\"values\":[9.0,1.0,1.0,9.0]}\n"
    );
}

#[test]
fn discretize_round_trip_reproduces_the_spectrum_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let prof_path = dir.path().join("profile.json");
    let seg = ["--segments", "300"];
    let out = run(&[
        "discretize",
        "--potential",
        "builtin:gaussian_double_barrier",
        seg[0],
        seg[1],
        "--out",
        prof_path.to_str().unwrap(),
    ]);
    assert_success(&out);

    let sweep = |potential: &str| {
        let out = run(&[
            "transmit",
            "--potential",
            potential,
            seg[0],
            seg[1],
            "--emin",
            "0.2",
            "--emax",
            "1.8",
            "--points",
            "200",
        ]);
        assert_success(&out);
        out.stdout
    };
    let from_smooth = sweep("builtin:gaussian_double_barrier");
    let from_file = sweep(prof_path.to_str().unwrap());
    assert_eq!(from_smooth, from_file, "round-trip must be lossless");

    // Re-discretizing the written profile is the identity.
    let again = run(&[
        "discretize",
        "--potential",
        prof_path.to_str().unwrap(),
    ]);
    assert_success(&again);
    let original = std::fs::read_to_string(&prof_path).unwrap();
    assert_eq!(stdout_of(&again), original);
}

#[test]
fn gaussian_sweep_is_self_converged_in_the_segment_count() {
    let sweep = |segments: &str| {
        let out = run(&[
            "transmit",
            "--potential",
            "builtin:gaussian_double_barrier",
            "--segments",
            segments,
            "--emin",
            "0.2",
            "--emax",
            "1.8",
            "--points",
            "200",
        ]);
        assert_success(&out);
        let (_, rows) = parse_csv(stdout_of(&out));
        rows.iter().map(|r| r[1]).collect::<Vec<f64>>()
    };
    let coarse = sweep("1000");
    let fine = sweep("4000");
    let max_diff = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(max_diff <= 1e-5, "max P_T drift {max_diff}");
}

#[test]
fn outputs_are_byte_deterministic_across_thread_counts() {
    let args = [
        "transmit",
        "--potential",
        "builtin:gaussian_double_barrier",
        "--segments",
        "200",
        "--emin",
        "0.3",
        "--emax",
        "1.5",
        "--points",
        "401",
    ];
    let run_with = |threads: &str| {
        let out = bin().args(args).env("QSOLVE_THREADS", threads).output().unwrap();
        assert_success(&out);
        out.stdout
    };
    let one = run_with("1");
    let three = run_with("3");
    let three_again = run_with("3");
    assert_eq!(one, three, "thread count must not change output bytes");
    assert_eq!(three, three_again, "repeat runs must be identical");
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let out = bin()
        .args(["transmit", "--potential", "builtin:rect_double_barrier", "--emin", "0.5", "--emax", "2.0"])
        .env("QSOLVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("QSOLVE_THREADS"));
}

#[test]
fn out_flag_writes_data_and_gnuplot_companion() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let out = run(&[
        "transmit",
        "--potential",
        "builtin:rect_double_barrier?height=30",
        "--emin",
        "0.5",
        "--emax",
        "29.5",
        "--points",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(stdout_of(&out), "", "data goes to the file, not stdout");
    let gp = dir.path().join("spectrum.gp");
    assert!(csv.is_file());
    assert!(gp.is_file());
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(
        script.contains("'spectrum.csv'"),
        "companion must reference the data file by name: {script}"
    );
    let (header, rows) = parse_csv(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(header, "E,P_T,ln_PT,ln_abs_A1");
    assert_eq!(rows.len(), 50);

    let wav = dir.path().join("wave.csv");
    let out = run(&[
        "wavefunction",
        "--potential",
        "builtin:rect_double_barrier?height=30",
        "--energy",
        "5.2",
        "--points",
        "11",
        "--out",
        wav.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(dir.path().join("wave.gp").is_file());
}

#[test]
fn eigen_reports_double_barrier_states_with_full_records() {
    let dir = TempDir::new().unwrap();
    let json_path = dir.path().join("states.json");
    let out = run(&[
        "eigen",
        "--potential",
        "builtin:rect_double_barrier?height=30",
        "--tol-e",
        "1e-10",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_success(&out);
    let summary = stdout_of(&out);
    assert!(summary.contains("2 state(s)"), "summary: {summary}");

    let text = std::fs::read_to_string(&json_path).unwrap();
    let states: serde_json::Value = serde_json::from_str(&text).unwrap();
    let states = states.as_array().expect("a JSON list");
    assert_eq!(states.len(), 2);
    // Same resonances the library-level tests pin down.
    let expect = [5.2078158, 19.4576583];
    for (i, (s, e)) in states.iter().zip(expect).enumerate() {
        assert_eq!(s["index"].as_u64(), Some(i as u64));
        let ev = s["eigenvalue"].as_f64().unwrap();
        assert!((ev - e).abs() < 1e-6, "state {i}: {ev}");
        assert_eq!(s["node_count"].as_u64(), Some(i as u64));
        assert!(s["part_used"].is_string());
        assert!(s["localization"].is_string());
        let grid = s["grid"].as_array().unwrap();
        let psi = s["psi"].as_array().unwrap();
        assert_eq!(grid.len(), psi.len());
        assert!(grid.len() > 100);
    }
}

#[test]
fn eigen_with_no_resonances_prints_an_empty_list() {
    let dir = TempDir::new().unwrap();
    let pot = write_potential(
        &dir,
        "barrier.json",
        r#"{"breakpoints": [0, 1], "values": [5]}"#,
    );
    let out = run(&["eigen", "--potential", &pot, "--emin", "0.5", "--emax", "4.5"]);
    assert_success(&out);
    assert_eq!(stdout_of(&out), "[]\n");
    assert!(stderr_of(&out).contains("0 state(s)"));
}

#[test]
fn invalid_expression_reports_the_parse_position() {
    let dir = TempDir::new().unwrap();
    let pot = write_potential(&dir, "bad.json", r#"{"expr": "x +", "support": [0, 1]}"#);
    let out = run(&["transmit", "--potential", &pot, "--emin", "1", "--emax", "2"]);
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(
        err.contains("position 4"),
        "stderr should carry the offset: {err}"
    );

    let pot2 = write_potential(&dir, "bad2.json", r#"{"expr": "foo(x)", "support": [0, 1]}"#);
    let out2 = run(&["discretize", "--potential", &pot2]);
    assert_eq!(exit_code(&out2), 1);
    assert!(stderr_of(&out2).contains("position 1"));
}

#[test]
fn missing_potential_file_is_an_io_error() {
    let out = run(&[
        "transmit",
        "--potential",
        "/nonexistent/potential.json",
        "--emin",
        "1",
        "--emax",
        "2",
    ]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr_of(&out).contains("/nonexistent/potential.json"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&[
        "transmit",
        "--potential",
        "builtin:rect_double_barrier",
        "--emin",
        "0.5",
        "--emax",
        "2.0",
        "--points",
        "10",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn usage_errors_exit_with_code_one() {
    // Backwards energy window.
    let out = run(&[
        "transmit",
        "--potential",
        "builtin:rect_double_barrier",
        "--emin",
        "3",
        "--emax",
        "1",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("0 < emin < emax"));

    // Negative lower edge parses as a value, then fails validation.
    let out = run(&[
        "transmit",
        "--potential",
        "builtin:rect_double_barrier",
        "--emin",
        "-1",
        "--emax",
        "2",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_of(&out).contains("0 < emin < emax"));

    // A lone window edge violates the flag pairing.
    let out = run(&[
        "eigen",
        "--potential",
        "builtin:rect_double_barrier",
        "--emin",
        "1",
    ]);
    assert_eq!(exit_code(&out), 1);

    // Unknown builtin names list the valid ones once.
    let out = run(&["discretize", "--potential", "builtin:no_such_model"]);
    assert_eq!(exit_code(&out), 1);
    let err = stderr_of(&out);
    assert!(err.contains("no_such_model"), "stderr: {err}");
    assert_eq!(err.matches("rect_double_barrier").count(), 1, "stderr: {err}");

    // --flank contradicts a step-profile source.
    let out = run(&[
        "eigen",
        "--potential",
        "builtin:rect_double_barrier",
        "--flank",
        "2.0",
    ]);
    assert_eq!(exit_code(&out), 1);

    // Zero segments are rejected before any work happens.
    let out = run(&[
        "discretize",
        "--potential",
        "builtin:gaussian_double_barrier",
        "--segments",
        "0",
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn help_and_version_exit_cleanly() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(stdout_of(&help).contains("transmit"));
    let sub = run(&["transmit", "--help"]);
    assert_eq!(exit_code(&sub), 0);
    assert!(stdout_of(&sub).contains("--engine"));
    let none = run(&[]);
    assert_eq!(exit_code(&none), 1, "missing subcommand is a usage error");
}

#[test]
fn smoothness_check_passes_on_a_discretized_model() {
    let out = run(&[
        "wavefunction",
        "--potential",
        "builtin:harmonic_model",
        "--segments",
        "500",
        "--energy",
        "1.0",
        "--points",
        "21",
        "--check",
    ]);
    assert_success(&out);
    let err = stderr_of(&out);
    assert!(err.starts_with("check: "), "stderr: {err}");
    let (_, rows) = parse_csv(stdout_of(&out));
    assert_eq!(rows.len(), 21);
}
