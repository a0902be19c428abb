use std::process::Command;

use affjet_cli::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use serde_json::{json, Value};

fn call(args: &[&str]) -> (i32, Value) {
    let argv = std::iter::once("affjet").chain(args.iter().copied());
    let (code, text) = run(argv);
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"));
    (code, v)
}

fn write(dir: &tempfile::TempDir, name: &str, body: &Value) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn split_suite_reports_names() {
    let (code, v) = call(&["identities", "verify", "--suite", "split"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["ok"], json!(true));
    assert_eq!(v["identities"], json!(["riemannian-splitting", "minus-factor-product"]));
}

#[test]
fn every_suite_passes() {
    for suite in ["all", "pick", "compat", "char"] {
        let (code, v) = call(&["identities", "verify", "--suite", suite, "--samples", "20"]);
        assert_eq!(code, EXIT_OK, "{suite}: {v}");
        assert_eq!(v["failed"], json!([]));
    }
}

#[test]
fn paraboloid_invariant() {
    let (code, v) = call(&["invariant", "--surface", "(x^2+y^2)/2", "--at", "0,0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["F"], json!("0"));
    assert_eq!(v["region"], json!("plus"));
    assert_eq!(v["det_hess"], json!("1"));
}

#[test]
fn invariant_from_jet_file_and_float_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (_, jet) = call(&["jet", "eval", "--surface", "x^3 + x*y^2 - y^2 + x^2", "--at", "1/2,-1", "--order", "3"]);
    let path = write(&dir, "jet.json", &jet["jet"]);
    let (code, exact) = call(&["invariant", "--jet", &path]);
    assert_eq!(code, EXIT_OK);
    let (_, float) = call(&["invariant", "--jet", &path, "--mode", "float"]);
    let fe: f64 = exact["F"].as_str().unwrap().parse::<affjet::Scalar>().unwrap().to_f64();
    let ff = float["F"].as_f64().unwrap();
    assert!((fe - ff).abs() <= 1e-9 * fe.abs().max(1.0));
}

#[test]
fn sphere_jet_eval() {
    let (code, v) = call(&["jet", "eval", "--surface", "sqrt(1 - x^2 - y^2)", "--at", "0,0", "--order", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["jet"]["u"], json!("1"));
    assert_eq!(v["jet"]["d"]["xx"], json!("-1"));
    assert_eq!(v["jet"]["d"]["yy"], json!("-1"));
    let (code, v) = call(&["jet", "eval", "--surface", "sqrt(1 - x^2 - y^2)", "--at", "-1,0"]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(v["error"], json!("EvalError"));
}

#[test]
fn symmetry_checks() {
    let (code, v) = call(&["symmetry", "check", "--generator", "11"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!((v["divisible"].clone(), v["quotient"].clone()), (json!(true), json!("5")));
    let (code, v) = call(&["symmetry", "check"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["generators"].as_array().unwrap().len(), 12);
    let (code, v) = call(&["symmetry", "check", "--field", "x*u;0;0"]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(v["divisible"], json!(false));
    let (code, _) = call(&["symmetry", "check", "--generator", "12"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn action_keeps_equation() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(&dir, "map.json", &json!({"M": [["2", "1", "0"], ["0", "1", "1/2"], ["1", "0", "1"]], "t": ["1", "-1", "0"]}));
    let (code, v) = call(&["action", "apply", "--map", &map, "--surface", "(x^2 - y^2)/2", "--at", "0,0", "--order", "3"]);
    assert_eq!(code, EXIT_OK, "{v}");
    assert_eq!(v["F_image"], json!("0"));
    assert_eq!(v["region_image"], json!("minus"));
    let bad = write(&dir, "bad.json", &json!({"M": [["1", "0", "0"], ["1", "0", "0"], ["0", "0", "1"]], "t": ["0", "0", "0"]}));
    let (code, _) = call(&["action", "apply", "--map", &bad, "--surface", "x", "--at", "0,0"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn compat_and_conic() {
    let (code, v) = call(&["compat", "check", "--surface", "x*y/(1+y)", "--samples", "10"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["max_residual"], json!(0.0));
    assert_eq!(v["samples"], json!(10));
    let (code, _) = call(&["compat", "check", "--surface", "x^3 + y^3 + x^2 + y^2", "--samples", "3"]);
    assert_eq!(code, EXIT_FAILED);

    let dir = tempfile::tempdir().unwrap();
    let sphere = json!({"a": "1", "h": ["0", "0", "0", "0"], "k": ["-1", "0", "0", "1", "0", "1", "0", "0", "0"]});
    let path = write(&dir, "sphere.json", &sphere);
    for b in ["+", "-"] {
        let (code, v) = call(&["conic", "check", "--coeffs", &path, "--branch", b]);
        assert_eq!(code, EXIT_OK);
        assert!(v["max_residual"].as_f64().unwrap() < 1e-10);
    }
    let mut far = sphere.clone();
    far["samples"] = json!([["2", "0"]]);
    let path = write(&dir, "far.json", &far);
    let (code, v) = call(&["conic", "check", "--coeffs", &path]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(v["error"], json!("NoRealBranch"));
}

#[test]
fn characteristics_report() {
    let dir = tempfile::tempdir().unwrap();
    let jet = json!({"order": 3, "x": "0", "y": "0", "u": "0",
        "d": {"x": "0", "y": "0", "xx": "-1", "xy": "0", "yy": "1", "xxx": "-6", "xxy": "1", "xyy": "1", "yyy": "0"}});
    let path = write(&dir, "jet.json", &jet);
    let (code, v) = call(&["characteristics", "--jet", &path]);
    assert_eq!(code, EXIT_OK, "{v}");
    assert_eq!(v["on_equation"], json!(true));
    assert_eq!(v["determinant"], json!("0"));
    assert_eq!(v["char_line"][0], v["char_line"][1]);
    let plus = json!({"order": 2, "x": "0", "y": "0", "u": "0", "d": {"x": "0", "y": "0", "xx": "1", "xy": "0", "yy": "1"}});
    let path = write(&dir, "plus.json", &plus);
    let (code, v) = call(&["characteristics", "--jet", &path]);
    assert_eq!(code, EXIT_FAILED);
    assert_eq!(v["error"], json!("WrongRegion"));
}

#[test]
fn usage_errors() {
    let (code, v) = call(&["jet", "eval", "--surface", "x y", "--at", "0,0"]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(v["error"], json!("ParseError"));
    let (code, v) = call(&["frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(v["error"], json!("UsageError"));
    let (code, _) = call(&["invariant", "--jet", "/nonexistent/jet.json"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn seeded_runs_are_identical() {
    let a = run(["affjet", "compat", "check", "--surface", "sqrt(1+x^2+y^2)", "--samples", "4", "--seed", "9"]);
    let b = run(["affjet", "compat", "check", "--surface", "sqrt(1+x^2+y^2)", "--samples", "4", "--seed", "9"]);
    assert_eq!(a, b);
    let c = run(["affjet", "compat", "check", "--surface", "sqrt(1+x^2+y^2)", "--samples", "4", "--seed", "10"]);
    assert_ne!(a.1, c.1);
}

#[test]
fn reports_reparse_as_their_types() {
    let (_, v) = call(&["jet", "eval", "--surface", "x^2*y - y^3/3", "--at", "1,2", "--order", "4"]);
    let j: affjet::JetPoint = serde_json::from_value(v["jet"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&j).unwrap(), v["jet"]);
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "jet.json", &json!({"order": 2, "x": "0", "y": "0", "u": "0",
        "d": {"x": "0", "y": "0", "xx": "-3", "xy": "1", "yy": "2"}}));
    let (_, v) = call(&["characteristics", "--jet", &path]);
    let basis: Vec<affjet::characteristics::ContactVector> = serde_json::from_value(v["distribution"].clone()).unwrap();
    assert_eq!(basis.len(), 3);
}

#[test]
fn binary_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_affjet"))
        .args(["identities", "verify", "--suite", "split", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["ok"], json!(true));
    let output = Command::new(env!("CARGO_BIN_EXE_affjet")).args(["jet", "eval", "--surface", "(", "--at", "0,0"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["error"], json!("ParseError"));
}
