use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quadfield(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadfield"))
        .args(args)
        .env("QUADFIELD_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, name: &str, coefficients: &str, init: &str) -> String {
    let text = format!(
        r#"{{
  "name": "{name}",
  "coefficients": {coefficients},
  "init": {init},
  "grid": {{"t_max": 10, "dt": 0.01}}
}}"#
    );
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const GROUND: &str = r#"{"alpha0": 0, "beta0": 1, "gamma0": 0, "delta0": 0, "eps0": 0, "kappa0": 0}"#;

#[test]
fn static_oscillator_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let res = quadfield(&["run", "static_oscillator"], &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["ermakov.csv", "observables.csv", "invariants.csv", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let obs = fs::read_to_string(out.join("observables.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(obs.as_bytes());
    let product = rows.headers().unwrap().iter().position(|h| h == "product").unwrap();
    let mut n = 0;
    for row in rows.records() {
        let v: f64 = row.unwrap()[product].parse().unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 1001);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"build\""));
    assert!(manifest.contains("\"oracle_agreement\""));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = quadfield(&["run", "driven_oscillator"], out);
        assert_eq!(res.status.code(), Some(0));
    }
    for f in ["ermakov.csv", "observables.csv", "invariants.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn ensemble_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let res = quadfield(&["ensemble", "noisy_lossy_medium", "--paths", "16", "--seed", seed], &out);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
        fs::read(out.join("ensemble.csv")).unwrap()
    };
    let first = run("a", "11");
    assert_eq!(first, run("b", "11"));
    assert_ne!(first, run("c", "12"));
}

#[test]
fn missing_beta0_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(
        dir.path(),
        "broken",
        r#"{"preset": {"a": {"constant": 0.5}, "b": {"constant": 0.5}}}"#,
        r#"{"alpha0": 0, "gamma0": 0, "delta0": 0, "eps0": 0, "kappa0": 0}"#,
    );
    let res = quadfield(&["run", &config], &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("beta0") && err.contains("line"), "{err}");
}

#[test]
fn sign_change_of_a_is_rejected_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(
        dir.path(),
        "sign_change",
        r#"{"preset": {"a": {"sinusoid": {"offset": 0.2, "amplitude": 0.5, "frequency": 1.0}}, "b": {"constant": 0.5}}}"#,
        GROUND,
    );
    let res = quadfield(&["run", &config], &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("changes sign"));
}

#[test]
fn numerical_failure_reports_stage_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario(
        dir.path(),
        "runaway_frequency",
        r#"{"preset": {"a": {"constant": 0.5}, "b": {"exponential": {"scale": 0.5, "rate": 4.0}}}}"#,
        GROUND,
    );
    let res = quadfield(&["run", &config], &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(3));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("characteristic") && err.contains("t = "), "{err}");
}

#[test]
fn failing_checks_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let res = quadfield(&["verify", "--tol", "1e-14"], &dir.path().join("out"));
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL"));
}

#[test]
fn dump_basis_emits_the_characteristic_columns() {
    let dir = tempfile::tempdir().unwrap();
    let res = quadfield(&["dump-basis", "static_oscillator"], dir.path());
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mu0,mu0p,mu1,mu1p,lambda,wronskian"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 10f64.sin()).abs() < 1e-9);
    assert!((last[3] - 10f64.cos()).abs() < 1e-9);
}
