use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eulerdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulerdeg")).args(args).output().unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn row<'a>(r: &'a Value, method: &str) -> &'a Value {
    r["rows"].as_array().unwrap().iter().find(|row| row["method"] == method).unwrap()
}

#[test]
fn s2_rotation_agrees_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let out = eulerdeg(&["run", "s2-rotation", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "s2-rotation");
    for m in ["index-sum", "gbc-integral"] {
        assert_eq!(row(&r, m)["rounded"], 2);
        assert_eq!(row(&r, m)["oracle"], 2);
    }
    assert_eq!(r["index_sum"]["zeros"].as_array().unwrap().len(), 2);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("index-sum") && table.contains("gbc-integral"));
}

#[test]
fn constant_disk_field_warns_but_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = eulerdeg(&["run", "disk-constant-field", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let r = report(dir.path(), "disk-constant-field");
    let b = &r["boundary"];
    assert_eq!(b["chi_morse"], 1);
    assert_eq!(b["chi_oracle"], 1);
    assert_eq!(b["chi_paper"], 0.0);
    assert!(b["flags"].as_array().unwrap().iter().any(|f| f == "paper-disagrees"));
    assert_eq!(b["boundary_zeros"].as_array().unwrap().len(), 2);
}

#[test]
fn asserting_the_half_weighted_formula_fails_the_constant_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = eulerdeg(&[
        "run",
        "disk-constant-field",
        "--assert-paper-boundary",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_one() {
    assert_eq!(eulerdeg(&["run", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(eulerdeg(&["run"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"schema\": 1,\n  \"name\": }").unwrap();
    let out = eulerdeg(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, column 11"));

    let catalog = dir.path().join("catalog.json");
    std::fs::write(
        &catalog,
        r#"{"schema": 1, "name": "k", "domain": {"kind": "sphere", "dim": 3}, "methods": ["gbc-integral"]}"#,
    )
    .unwrap();
    assert_eq!(eulerdeg(&["run", catalog.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn scenario_files_run_like_bundled_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mine.json");
    std::fs::write(
        &path,
        r#"{"schema": 1, "name": "mine", "domain": {"kind": "ball", "dim": 2, "radius": 2},
            "field": {"kind": "complex", "factors": [{"zero": [0.5, 0.5]}, {"zero": [-0.5, 0.0], "conjugate": true}]},
            "methods": ["index-sum"]}"#,
    )
    .unwrap();
    let out = eulerdeg(&["run", path.to_str().unwrap(), "--json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, report(dir.path(), "mine"));
    assert_eq!(row(&printed, "index-sum")["rounded"], 0);
}

#[test]
fn reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = eulerdeg(&["run", "s2-height", "disk-saddle", "--out", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["s2-height", "disk-saddle"] {
        let file = format!("{name}.report.json");
        assert_eq!(
            std::fs::read(a.path().join(&file)).unwrap(),
            std::fs::read(b.path().join(&file)).unwrap()
        );
    }
}

#[test]
fn listing() {
    let out = eulerdeg(&["list", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["scenarios"].as_array().unwrap().len() >= 10);
    assert_eq!(v["manifolds"].as_array().unwrap().len(), 5);

    let out = eulerdeg(&["list", "--json", "--filter", "boundary"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let filtered = v["scenarios"].as_array().unwrap();
    assert!(!filtered.is_empty());
    for s in filtered {
        assert!(s["tags"].as_array().unwrap().iter().any(|t| t == "boundary"), "{s}");
    }

    let text = String::from_utf8(eulerdeg(&["list"]).stdout).unwrap();
    assert!(text.contains("s2-rotation") && text.contains("chi = 2"));
}
