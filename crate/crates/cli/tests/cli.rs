//! End-to-end tests of the `nlwave` binary: exit-code contract, output
//! determinism, and file-pipeline equivalence with in-process calls.

use std::path::Path;
use std::process::{Command, Output};

use nlwave_core::{bounds, dispersion, io, wave, Kernel, ModelParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlwave"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).unwrap();
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

const BASE: &str = r#"{
  "params": { "a": 5.0, "b": 1.0, "d": 0.5 },
  "kernel1": { "family": "uniform", "radius": 1.0 },
  "kernel2": { "family": "uniform", "radius": 1.0 }
"#;

fn reference() -> (ModelParams, Kernel, Kernel) {
    (
        ModelParams::new(5.0, 1.0, 0.5).unwrap(),
        Kernel::uniform(1.0).unwrap(),
        Kernel::uniform(1.0).unwrap(),
    )
}

#[test]
fn speed_matches_library_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.json", &format!("{BASE}}}"));
    let out = run(&["speed", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{out:?}");

    let (p, _, k2) = reference();
    let report = dispersion::minimal_speed(&p, &k2).unwrap();
    let text = read(tmp.path(), "o/speed.json");
    let parsed: dispersion::SpeedReport = io::from_json(&text).unwrap();
    assert_eq!(parsed.s_star.to_bits(), report.s_star.to_bits());
    assert_eq!(parsed.lambda_star.to_bits(), report.lambda_star.to_bits());

    // Determinism: a second invocation produces byte-identical output.
    let out2 = run(&["speed", "--config", "run.json", "--out", "o2", "--quiet"], tmp.path());
    assert!(out2.status.success());
    assert_eq!(text, read(tmp.path(), "o2/speed.json"));
}

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "run.json",
        r#"{
  "params": { "a": 5.0, "b": 1.0, "d": -1.0 },
  "kernel1": { "family": "uniform", "radius": 1.0 },
  "kernel2": { "family": "uniform", "radius": 1.0 }
}"#,
    );
    let out = run(&["speed", "--config", "run.json", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains('d'), "stderr should name the field: {stderr}");
}

#[test]
fn unknown_keys_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "run.json",
        &format!("{BASE},\n  \"unexpected_key\": 1\n}}"),
    );
    let out = run(&["speed", "--config", "run.json", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn subcritical_roots_exit_3_citing_minimal_speed() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.json", &format!("{BASE},\n  \"roots\": {{ \"s\": 0.5 }}\n}}"));
    let out = run(&["roots", "--config", "run.json", "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("s* = 0.68"), "{stderr}");
}

#[test]
fn tabulated_kernel_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    // Triangular-shaped table with a declared finite abscissa.
    let mut table = String::from("lambda_hat=8.0\n");
    let n = 201;
    for i in 0..n {
        let y = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        table.push_str(&format!("{y} {}\n", 1.0 - y.abs()));
    }
    write(tmp.path(), "kern.txt", &table);
    write(
        tmp.path(),
        "run.json",
        r#"{
  "params": { "a": 5.0, "b": 1.0, "d": 0.5 },
  "kernel1": { "family": "uniform", "radius": 1.0 },
  "kernel2": { "family": "tabulated", "path": "kern.txt" }
}"#,
    );
    let out = run(&["speed", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{out:?}");
    let parsed: dispersion::SpeedReport =
        io::from_json(&read(tmp.path(), "o/speed.json")).unwrap();
    assert!(parsed.attained);
    assert!(parsed.s_star > 0.0);
}

#[test]
fn bounds_then_wave_pipeline_matches_in_process() {
    let tmp = tempfile::tempdir().unwrap();
    let (p, k1, k2) = reference();
    let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
    let s = 1.2 * s_star;
    write(
        tmp.path(),
        "run.json",
        &format!(
            "{BASE},\n  \"bounds\": {{ \"s\": {s:.17e}, \"grid_n\": 2001, \"grid_span\": 30.0 }},\n  \
             \"wave\": {{ \"s\": {s:.17e}, \"L\": 30.0, \"n\": 3000, \"tol\": 1e-5, \"bundle\": \"o/bundle.json\" }}\n}}"
        ),
    );
    let out = run(&["bounds", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["wave", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));

    // In-process pipeline with the same inputs.
    let bundle = bounds::construct_supercritical(&p, &k1, &k2, s).unwrap();
    let opts = wave::SolveOptions {
        half_width: 30.0,
        intervals: 3000,
        tol: 1e-5,
        max_iter: 60_000,
        shift: 0.0,
    };
    let profile = wave::solve(&p, &k1, &k2, &bundle, &opts).unwrap();

    let sidecar: io::ProfileSidecar = io::from_json(&read(tmp.path(), "o/profile.json")).unwrap();
    let from_files = io::profile_from_csv(&read(tmp.path(), "o/profile.csv"), &sidecar).unwrap();
    assert_eq!(from_files.iterations, profile.iterations);
    assert_eq!(from_files.phi.len(), profile.phi.len());
    for i in 0..profile.phi.len() {
        assert_eq!(from_files.phi[i].to_bits(), profile.phi[i].to_bits(), "phi at {i}");
        assert_eq!(from_files.psi[i].to_bits(), profile.psi[i].to_bits(), "psi at {i}");
    }
    // Round-trip of the bundle document is lossless.
    let round: bounds::BoundsBundle = io::from_json(&read(tmp.path(), "o/bundle.json")).unwrap();
    assert_eq!(round.q.to_bits(), bundle.q.to_bits());
    assert_eq!(round.epsilon.to_bits(), bundle.epsilon.to_bits());
}

#[test]
fn simulate_invasion_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "run.json",
        &format!(
            "{BASE},\n  \"simulate\": {{ \"initial\": \"invasion\", \"X\": 30.0, \"h\": 0.1, \"T\": 5.0, \"snapshot_every\": 2.5 }}\n}}"
        ),
    );
    let out = run(&["simulate", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("o/manifest.json").exists());
    assert!(tmp.path().join("o/front_trace.csv").exists());
    assert!(tmp.path().join("o/snapshot_0000.csv").exists());
    assert!(tmp.path().join("o/speed_summary.json").exists());
    let manifest = read(tmp.path(), "o/manifest.json");
    assert!(manifest.contains("dt_bound"));
}

#[test]
fn simulate_wave_initial_produces_drift_report() {
    let tmp = tempfile::tempdir().unwrap();
    let (p, k1, k2) = reference();
    let s_star = dispersion::minimal_speed(&p, &k2).unwrap().s_star;
    let bundle = bounds::construct_supercritical(&p, &k1, &k2, 1.2 * s_star).unwrap();
    let opts = wave::SolveOptions {
        half_width: 30.0,
        intervals: 3000,
        tol: 1e-5,
        max_iter: 60_000,
        shift: 0.0,
    };
    let profile = wave::solve(&p, &k1, &k2, &bundle, &opts).unwrap();
    write(tmp.path(), "profile.csv", &io::profile_to_csv(&profile));
    write(
        tmp.path(),
        "profile.json",
        &io::to_json(&io::ProfileSidecar::of(&profile, "bundle.json")).unwrap(),
    );
    write(
        tmp.path(),
        "run.json",
        &format!(
            "{BASE},\n  \"simulate\": {{ \"initial\": {{ \"wave\": {{ \"profile\": \"profile.csv\", \"sidecar\": \"profile.json\" }} }}, \
             \"X\": 120.0, \"h\": 0.1, \"T\": 4.0, \"snapshot_every\": 0.0 }}\n}}"
        ),
    );
    let out = run(&["simulate", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let drift: nlwave_core::simulate::DriftReport =
        io::from_json(&read(tmp.path(), "o/drift_report.json")).unwrap();
    assert!(drift.drift < 0.05, "drift {}", drift.drift);
}

#[test]
fn validate_kernel_reports() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "run.json", &format!("{BASE}}}"));
    let out = run(&["validate-kernel", "--config", "run.json", "--out", "o", "--quiet"], tmp.path());
    assert!(out.status.success());
    let text = read(tmp.path(), "o/validation.json");
    assert!(text.contains("\"pass\":true"));
}
