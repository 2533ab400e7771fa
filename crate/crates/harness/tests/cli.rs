use std::path::Path;
use std::process::Command;

use csplab_core::csp::Instance;

fn csplab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_csplab"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const VALIDATE: &str = r#"
    replications = 3
    [family]
    kind = "xor"
    k = 3
    n = 14
    excess_degree = 2
    m = 6
    structure = "triangle-free"
"#;

#[test]
fn exit_zero_when_tolerances_hold() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "ok.toml", VALIDATE);
    let out = dir.path().join("v.json");
    let (code, _) = csplab(&[
        "validate",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--csv",
        "--workers",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(
        out.exists()
            && dir.path().join("v.rows.jsonl").exists()
            && dir.path().join("v.rows.csv").exists()
    );
}

#[test]
fn exit_one_on_tolerance_violation() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{VALIDATE}\n[tolerances]\ndiscrepancy = -1.0\n");
    let config = write(dir.path(), "strict.toml", &text);
    let (code, stdout) = csplab(&["validate", "--config", &config]);
    assert_eq!(code, 1);
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["checks"][0]["passed"], false);
}

#[test]
fn exit_two_on_usage_or_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(csplab(&["validate"]).0, 2);
    assert_eq!(csplab(&["frobnicate", "--config", "x"]).0, 2);
    assert_eq!(csplab(&["validate", "--config", "/nonexistent.toml"]).0, 2);
    let bad = write(
        dir.path(),
        "bad.toml",
        "[family]\nkind = \"xor\"\nn = 30\nexcess_degree = 2\n",
    );
    assert_eq!(csplab(&["validate", "--config", &bad]).0, 2);
    let zero = write(
        dir.path(),
        "zero.toml",
        &format!("replications = 0\n{VALIDATE}"),
    );
    assert_eq!(csplab(&["validate", "--config", &zero]).0, 2);
}

#[test]
fn gen_writes_a_loadable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "gen.toml", VALIDATE);
    let out = dir.path().join("inst.json");
    let (code, _) = csplab(&[
        "gen",
        "--config",
        &config,
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let inst = Instance::read_file(&out).unwrap();
    assert_eq!((inst.n(), inst.m(), inst.declared_max_degree()), (14, 6, 3));
    assert!(inst.is_triangle_free());
    let (_, again) = csplab(&["gen", "--config", &config, "--seed", "9"]);
    assert_eq!(Instance::from_json(&again).unwrap(), inst);
}
