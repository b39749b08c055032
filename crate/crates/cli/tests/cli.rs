//! End-to-end runs of the `povmqm` binary.

use std::path::Path;
use std::process::{Command, Output};

fn povmqm(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_povmqm")).arg("--out").arg(out).args(args).output().unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_lists_flags_and_keys() {
    let out = Command::new(env!("CARGO_BIN_EXE_povmqm")).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["--config", "--out", "--format", "--override", "kernel-check", "reproduce", "kernel.l0", "grid.n"] {
        assert!(text.contains(needle), "help is missing {needle}");
    }
}

#[test]
fn constant_kernel_check_reports_zero_width() {
    let dir = tempfile::tempdir().unwrap();
    let out = povmqm(dir.path(), &["kernel-check", "--override", "kernel.family=constant"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("kernel_check.json"));
    assert_eq!(report["gram"]["positive_semidefinite"], true);
    assert_eq!(report["l0"].as_f64(), Some(0.0));
}

#[test]
fn oscillator_spectrum_shift_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("osc.conf");
    std::fs::write(
        &config,
        "kernel.family = gaussian\nkernel.l0 = 0.1\ngrid.n = 512\ngrid.p_max = 20\n\
         potential.kind = harmonic\npotential.omega = 1\nspectrum.count = 8\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = povmqm(&out_dir, &["spectrum", "--config", config.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(table.as_bytes());
    let shift = rows.headers().unwrap().iter().position(|h| h == "shift").expect("shift column");
    let mut count = 0;
    for row in rows.records() {
        let v: f64 = row.unwrap()[shift].parse().unwrap();
        assert!((v - 0.005).abs() < 1e-6, "shift {v}");
        count += 1;
    }
    assert_eq!(count, 8);
    assert!(!out_dir.join("spectrum.json").exists());
}

#[test]
fn auriga_bound_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = povmqm(dir.path(), &["bounds", "--experiment", "auriga"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(&dir.path().join("bounds_auriga.json"));
    let planck = json["l0_max_planck"].as_f64().expect("l0_max_planck");
    assert!(planck > 1e14 && planck < 1e18, "{planck}");
}

#[test]
fn oversized_time_step_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("never");
    let out = povmqm(&out_dir, &["evolve", "--override", "integrator.dt=10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = povmqm(dir.path(), &["density", "--override", "kernel.width=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel.width"));
}

#[test]
fn missing_state_file_is_an_io_or_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = povmqm(dir.path(), &["density", "--override", "state.file=/nonexistent/state.csv"]);
    assert!(matches!(out.status.code(), Some(2 | 4)), "{:?}", out.status.code());
}

#[test]
fn evolve_writes_a_reloadable_state() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let out = povmqm(&first, &["evolve", "--override", "integrator.steps=20", "--override", "integrator.stride=10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let state = first.join("final_state.csv");
    let second = dir.path().join("b");
    let out = povmqm(&second, &["density", "--override", &format!("state.file={}", state.display())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(second.join("density.csv").exists());
}

#[test]
fn shipped_configs_validate() {
    use povmqm_cli::config::{ConfigMap, OutputFormat, RunConfig};
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let map = ConfigMap::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let cfg = RunConfig::from_map(&map, "unused".into(), OutputFormat::Both)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.initial_state().unwrap();
        seen += 1;
    }
    assert!(seen >= 5);
}
