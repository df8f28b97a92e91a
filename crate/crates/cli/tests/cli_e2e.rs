use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bessel_forge::{Command as Sub, RunSpec, SpecError};
use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bessel-forge")
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bessel-forge-e2e-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn invoke(sub: &str, spec: &Path, extra: &[&str]) -> Output {
    Command::new(bin())
        .arg(sub)
        .arg("--spec")
        .arg(spec)
        .args(extra)
        .env("BESSEL_FORGE_THREADS", "2")
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn certify_exit_codes() {
    let ok = invoke("certify", &specs_dir().join("certify-q3-r2.json"), &[]);
    assert_eq!(ok.status.code(), Some(0));
    let rep = report(&ok);
    assert_eq!(rep["status"], "ok");
    assert_eq!(rep["result"]["certificate"]["verdict"], "certified");
    let integral = rep["result"]["certificate"]["criterion_integral"]
        .as_f64()
        .unwrap();
    assert!((integral - 0.25).abs() <= 1e-6);

    let neg = invoke("certify", &specs_dir().join("certify-q3-r1.json"), &[]);
    assert_eq!(neg.status.code(), Some(1));
    assert_eq!(
        report(&neg)["result"]["certificate"]["verdict"],
        "not-certified"
    );
}

#[test]
fn missing_field_is_a_schema_error() {
    let spec = scratch(
        "no-p.json",
        r#"{"W": "1", "H": "pow(r, -4)", "Q": 3, "r0": 2}"#,
    );
    let out = invoke("certify", &spec, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`p`"), "{err}");
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let spec = r#"{"action": "radial", "Q": 3, "p": 2, "H": "pow(r, -2)",
        "profile": {"family": "gaussian", "sigma": 0.3, "radius": 1, "width": 2}}"#;
    match RunSpec::parse(Sub::Hardy, spec) {
        Err(SpecError::Field { path, .. }) => assert_eq!(path, "profile"),
        other => panic!("{other:?}"),
    }
    let spec = r#"{"W": "1", "H": "1", "p": 2, "Q": 3, "r0": 2, "extra": 1}"#;
    match RunSpec::parse(Sub::Certify, spec) {
        Err(SpecError::Field { message, .. }) => assert!(message.contains("extra")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        RunSpec::parse(Sub::Rellich, r#"{"action": "solve"}"#),
        Err(SpecError::UnknownAction { .. })
    ));
    assert!(matches!(
        RunSpec::parse(Sub::Ode, r#"{"command": "certify"}"#),
        Err(SpecError::CommandMismatch { .. })
    ));
}

#[test]
fn stochastic_commands_require_a_seed() {
    let picone = r#"{"geometry": "heisenberg1", "p": 2}"#;
    match RunSpec::parse(Sub::Picone, picone) {
        Err(SpecError::Field { message, .. }) => assert!(message.contains("seed")),
        other => panic!("{other:?}"),
    }
    let group = r#"{"action": "group", "geometry": "heisenberg1", "p": 2, "H": "pow(r, -2)",
        "profile": {"family": "gaussian", "sigma": 0.4, "radius": 1},
        "box_half_width": 1.2, "exclusion": 0.05, "samples": 1000}"#;
    assert!(RunSpec::parse(Sub::Hardy, group).is_err());
}

#[test]
fn module_errors_land_in_the_report() {
    let spec = scratch(
        "bad-p.json",
        r#"{"W": "1", "H": "pow(r, -4)", "p": 0.5, "Q": 3, "r0": 2}"#,
    );
    let out = invoke("certify", &spec, &[]);
    assert_eq!(out.status.code(), Some(2));
    let rep = report(&out);
    assert_eq!(rep["status"], "error");
    assert!(rep["error"].as_str().is_some());
    assert!(rep["result"].is_null());
}

#[test]
fn ode_exit_codes_and_solution_csv() {
    let out = invoke(
        "ode",
        &specs_dir().join("ode-euler-q4.json"),
        &["--csv", "solution"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,v,v_prime,flux"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 4);
        assert!((cols[1] - 1.0 / cols[0]).abs() <= 1e-4 / cols[0]);
    }
    assert!(!csv.contains('\r'));

    let out = invoke("ode", &specs_dir().join("ode-supercritical.json"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["result"]["first_zero"].as_f64().is_some());
}

#[test]
fn picone_exit_codes() {
    let out = invoke("picone", &specs_dir().join("picone-heisenberg1.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["result"]["identity_holds"], true);
    assert_eq!(rep["spec"]["order"], 1);

    let spec = scratch(
        "picone-order2-heis.json",
        r#"{"geometry": "heisenberg1", "p": 2, "seed": 1, "order": 2}"#,
    );
    assert_eq!(invoke("picone", &spec, &[]).status.code(), Some(2));
}

#[test]
fn hardy_exit_codes_and_sweep_csv() {
    assert_eq!(
        invoke("hardy", &specs_dir().join("hardy-radial-q3.json"), &[])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        invoke(
            "hardy",
            &specs_dir().join("hardy-radial-supercritical.json"),
            &[]
        )
        .status
        .code(),
        Some(1)
    );
    let out = invoke(
        "hardy",
        &specs_dir().join("hardy-sweep-q4.json"),
        &["--csv", "sweep"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("param,ratio,uncertainty\n"));
    assert_eq!(csv.lines().count(), 6);

    let out = invoke(
        "hardy",
        &specs_dir().join("hardy-sweep-q4.json"),
        &["--csv", "phi"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rellich_exit_codes() {
    for f in [
        "rellich-constant.json",
        "rellich-hypothesis.json",
        "rellich-check.json",
    ] {
        assert_eq!(
            invoke("rellich", &specs_dir().join(f), &[]).status.code(),
            Some(0),
            "{f}"
        );
    }
    let spec = scratch(
        "rellich-hyp-too-big.json",
        r#"{"action": "hypothesis", "v": "pow(r, -0.5)", "H": "1.7 * pow(r, -4)", "p": 2, "n": 5,
            "radii": {"from": 0.5, "to": 5, "count": 10}}"#,
    );
    assert_eq!(invoke("rellich", &spec, &[]).status.code(), Some(1));
    let spec = scratch(
        "rellich-range.json",
        r#"{"action": "constant", "n": 5, "p": 2, "gamma": -1}"#,
    );
    assert_eq!(invoke("rellich", &spec, &[]).status.code(), Some(2));
}

#[test]
fn geometry_check_exit_codes() {
    let out = invoke(
        "geometry-check",
        &specs_dir().join("geometry-grushin.json"),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert_eq!(rep["result"]["passed"], true);
    let out = invoke(
        "geometry-check",
        &specs_dir().join("geometry-engel.json"),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn certify_phi_csv_and_out_file() {
    let dest = std::env::temp_dir().join(format!("bessel-forge-phi-{}.csv", std::process::id()));
    let out = invoke(
        "certify",
        &specs_dir().join("certify-q3-r2.json"),
        &["--csv", "phi", "--out", dest.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&dest).unwrap();
    assert!(csv.starts_with("r,phi\n"));
    for line in csv.lines().skip(1) {
        let (r, phi): (f64, f64) = {
            let mut it = line.split(',').map(|c| c.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        };
        // φ = 2∫_r^∞ s^{-2} ds
        assert!((phi - 2.0 / r).abs() <= 1e-8 * phi, "r = {r}");
    }
    std::fs::remove_file(dest).ok();
}

#[test]
fn echo_round_trip_reproduces_the_report() {
    for f in [
        "certify-weighted.json",
        "picone-grushin.json",
        "rellich-check.json",
        "hardy-search-q4.json",
    ] {
        let sub = f.split('-').next().unwrap();
        let first = invoke(sub, &specs_dir().join(f), &[]);
        let echo = serde_json::to_string(&report(&first)["spec"]).unwrap();
        let again = invoke(sub, &scratch(&format!("echo-{f}"), &echo), &[]);
        assert_eq!(first.stdout, again.stdout, "{f}");
        assert_eq!(first.status.code(), again.status.code());
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let spec = scratch(
        "group-small.json",
        r#"{"action": "group", "geometry": "heisenberg1", "p": 2, "H": "pow(r, -2)",
            "profile": {"family": "gaussian", "sigma": 0.4, "radius": 1},
            "box_half_width": 1.2, "exclusion": 0.05, "samples": 100000, "seed": 4}"#,
    );
    let run = |threads: &str| {
        Command::new(bin())
            .args(["hardy", "--spec"])
            .arg(&spec)
            .env("BESSEL_FORGE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, run("5").stdout);
    assert_eq!(run("0").status.code(), Some(2));
}
