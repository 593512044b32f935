//! End-to-end tests of the `qmzv` binary: exit codes, output shapes, and
//! byte-identical JSON against golden files.

use std::path::Path;
use std::process::{Command, Output};

fn qmzv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmzv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> Vec<u8> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("golden file {}: {}", path.display(), e))
}

fn assert_golden(args: &[&str], name: &str) {
    let out = qmzv(args);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        out.stdout,
        golden(name),
        "{:?} drifted from golden file {}",
        args,
        name
    );
    // repeated runs must be byte-identical
    let again = qmzv(args);
    assert_eq!(out.stdout, again.stdout, "{:?} is not deterministic", args);
}

#[test]
fn golden_bracket() {
    assert_golden(
        &["bracket", "--k", "2", "--d", "0", "--order", "6", "--json"],
        "bracket_g2_order6.json",
    );
}

#[test]
fn golden_verify_stuffle() {
    assert_golden(
        &["verify", "stuffle", "--k1", "1", "--k2", "1", "--order", "10", "--json"],
        "verify_stuffle_11.json",
    );
}

#[test]
fn golden_formal_relations() {
    assert_golden(
        &["formal", "relations", "--weight", "2", "--json"],
        "formal_relations_w2.json",
    );
}

#[test]
fn golden_formal_derive() {
    assert_golden(
        &["formal", "derive", "--weight", "4", "--target", "ramanujan2", "--json"],
        "formal_derive_ramanujan2.json",
    );
}

#[test]
fn verify_commands_exit_zero() {
    for args in [
        vec!["verify", "shuffle", "--k1", "2", "--k2", "3", "--order", "60"],
        vec!["verify", "partition", "--k", "2,1", "--d", "0,0", "--order", "20"],
        vec!["verify", "conjugation", "--k", "1,1,1", "--d", "1,0,0", "--order", "15"],
        vec!["verify", "betadsh", "--degree", "6"],
        vec!["formal", "welldefined", "--weight", "4"],
        vec!["formal", "qdsh", "--weight", "3"],
        vec!["formal", "derive", "--target", "g8"],
        vec!["realize", "--target", "ramanujan2", "--order", "10"],
    ] {
        let out = qmzv(&args);
        assert!(
            out.status.success(),
            "{:?} exited {:?}: {}",
            args,
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn failed_tolerance_exits_one() {
    let out = qmzv(&["limits", "--k", "2", "--tolerance", "1e-15"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL"), "{}", text);
}

#[test]
fn limits_passes_at_stated_tolerance() {
    let out = qmzv(&["limits", "--k", "2", "--tolerance", "1e-3", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn usage_errors_exit_two() {
    // missing required flag
    let out = qmzv(&["bracket"]);
    assert_eq!(out.status.code(), Some(2));
    // invalid index (k entry of zero)
    let out = qmzv(&["bracket", "--k", "0", "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
    // closed-form partition relation does not cover depth 3
    let out = qmzv(&["verify", "partition", "--k", "1,1,1", "--order", "10"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = qmzv(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    // theorem target without its parameters
    let out = qmzv(&["formal", "derive", "--target", "theorem41"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("qmzv-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bracket.json");
    let out = qmzv(&[
        "bracket", "--k", "1", "--order", "3", "--json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["series"]["coeffs"][2], serde_json::Value::String("2".into()));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn realize_depth_one_symbol_prints_eisenstein_series() {
    let out = qmzv(&["realize", "--k", "2", "--d", "0", "--order", "4", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let coeffs: Vec<&str> = v["series"]["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(coeffs, ["-1/24", "1", "3", "4", "7"]);
}

#[test]
fn realize_product_symbol() {
    let out = qmzv(&["realize", "--k", "4,4", "--d", "0,0", "--product", "--order", "2", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["series"]["coeffs"][0], serde_json::Value::String("1/2073600".into()));
}

#[test]
fn formal_basis_weight_two_text() {
    let out = qmzv(&["formal", "basis", "--weight", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "weight 2 basis (4 symbols):\n  G(2;0)\n  G(1;1)\n  G(1,1;0,0)\n  P(1,1;0,0)\n"
    );
}
