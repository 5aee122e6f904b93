use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn contact3() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contact3"));
    cmd.env_remove("CONTACT3_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    contact3().args(args).output().unwrap()
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/specs").join(format!("{name}.cmm"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn verify_reports_every_check_group() {
    let out = run(&["verify", spec("example1").to_str().unwrap(), "--points", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["structure"], "example1");
    for group in ["validation", "identities", "derivatives"] {
        assert_eq!(v[group]["passed"], true, "{group}");
        assert_eq!(v[group]["points"], 8);
        assert!(!v[group]["checks"].as_array().unwrap().is_empty());
    }
}

#[test]
fn nullity_text_names_the_class() {
    let out = run(&["nullity", spec("example1").to_str().unwrap(), "--points", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("classification: generalized (kappa,mu)"), "{text}");
    assert!(text.ends_with("nullity example1: PASS\n"));
}

#[test]
fn verbose_prints_one_row_per_point() {
    let out = run(&["nullity", spec("sasakian").to_str().unwrap(), "--points", "5", "--verbose"]);
    let text = stdout(&out);
    let header = text.lines().position(|l| l.starts_with("point")).expect("table header");
    let rows = text.lines().skip(header + 1).take_while(|l| l.starts_with('(')).count();
    assert_eq!(rows, 5);
}

#[test]
fn seed_comes_from_flag_or_environment() {
    let path = spec("example3");
    let base = ["nullity", path.to_str().unwrap(), "--points", "4", "--format", "json"];
    let by_flag = run(&[&base[..], &["--seed", "7"]].concat());
    let by_env = contact3().args(base).env("CONTACT3_SEED", "7").output().unwrap();
    let default = run(&base);
    assert_eq!(by_flag.stdout, by_env.stdout);
    assert_ne!(by_flag.stdout, default.stdout);
    assert_eq!(json(&by_flag)["seed"], 7);
}

#[test]
fn emitted_chart_verifies_on_its_own() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chart.cmm");
    let out = run(&[
        "chart",
        "--case",
        "1",
        "--k3",
        "1",
        "--r",
        "z^2",
        "--beta",
        "3*z",
        "--H",
        "y*z",
        "--points",
        "8",
        "--emit",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let emitted = std::fs::read_to_string(&path).unwrap();
    assert!(stdout(&out).starts_with(&emitted));
    let check = run(&["verify", path.to_str().unwrap(), "--points", "8"]);
    assert_eq!(check.status.code(), Some(0), "{}", stdout(&check));
}

#[test]
fn emitted_deformation_verifies_on_its_own() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deformed.cmm");
    let out = run(&[
        "dhomothety",
        spec("example3").to_str().unwrap(),
        "--alpha",
        "2",
        "--points",
        "8",
        "--emit",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let check = run(&["nullity", path.to_str().unwrap(), "--points", "8", "--format", "json"]);
    assert_eq!(check.status.code(), Some(0));
    // λ̄ = λ/α with λ = z on this chart.
    for row in json(&check)["rows"].as_array().unwrap() {
        let z = row["point"][2].as_f64().unwrap();
        let lambda = row["lambda"].as_f64().unwrap();
        assert!((lambda - z / 2.0).abs() < 1e-9, "{lambda} vs {}", z / 2.0);
    }
}

#[test]
fn box_flag_moves_the_samples() {
    let out =
        run(&["chart", "--case", "1", "--box", "z=2,2.5", "--box", "x=0,0.1", "--points", "6", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["spec"].as_str().unwrap().contains("box.z = 2.0, 2.5"));
    for row in v["report"]["rows"].as_array().unwrap() {
        let p: Vec<f64> = row["point"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).collect();
        assert!((0.0..=0.1).contains(&p[0]) && (2.0..=2.5).contains(&p[2]), "{p:?}");
    }
    let bad = run(&["chart", "--case", "1", "--box", "w=0,1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("coord=lo,hi"));
}

#[test]
fn chart_rejects_unsupported_k3() {
    let out = run(&["chart", "--case", "2", "--k3", "sin(z)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn chart_rejects_parameters_with_wrong_dependence() {
    let out = run(&["chart", "--case", "1", "--r", "x*z"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["chart", "--case", "1", "--H", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn examples_list_reported_discrepancies() {
    let out = run(&["examples", "--points", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["example1", "example3", "example4", "sasakian", "flat"] {
        assert!(text.contains(&format!("== {name} ==")), "{name}");
    }
    let example4 = &text[text.find("== example4 ==").unwrap()..text.find("== sasakian ==").unwrap()];
    assert!(example4.contains("discrepancies:"));
    assert!(example4.contains("ln(z)"));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cmm");
    std::fs::write(&path, "[manifold]\nname = bad\ncoordinates = x, y, z\n[frame]\nxi = 1, 0, 0\ne = -2*y, 2*x*z - 1, 1\nphie = 0, 1 +, 0\n").unwrap();
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cmm:7:"), "{err}");
}

#[test]
fn invalid_global_flags_are_usage_errors() {
    for args in [&["examples", "--points", "0"][..], &["examples", "--tol", "-1"], &["examples", "--format", "xml"]] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn chart_without_positive_lambda_explains_itself() {
    // λ = −1/(4z²) is negative everywhere unless shifted.
    let out = run(&["chart", "--case", "1", "--k3", "2*z^3", "--points", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda-const"));
    let shifted = run(&["chart", "--case", "1", "--k3", "2*z^3", "--lambda-const", "1", "--points", "4"]);
    assert_eq!(shifted.status.code(), Some(0), "{}", stdout(&shifted));
}
