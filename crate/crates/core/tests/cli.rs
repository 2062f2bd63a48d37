use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn algrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algrep")).args(args).output().unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn irreps_of_u3_f2() {
    let out = algrep(&["irreps", "u3_f2", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let mut degrees: Vec<u64> = recs.iter().map(|r| r["witness"]["degree"].as_u64().unwrap()).collect();
    degrees.sort();
    assert_eq!(degrees, [1, 1, 1, 1, 2]);
    for r in &recs {
        assert_eq!(r["check"], "irrep");
        assert_eq!(r["pass"], true);
        assert_eq!(r["runtime_ms"], 0);
        assert!(r["witness"].get("character").is_none());
    }
    let with_chars = records(&algrep(&["irreps", "u3_f2", "--characters"]));
    assert!(with_chars.iter().all(|r| r["witness"]["character"].is_object() || r["witness"]["character"].is_array()));
}

#[test]
fn verify_passes_on_small_algebras() {
    let out = algrep(&["verify", "x2_f2", "--ext", "2,4", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out);
    let checks: std::collections::BTreeSet<&str> = recs.iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(checks.len(), 12);
    assert!(recs.iter().all(|r| r["pass"] == true));
}

#[test]
fn norm_on_x2_is_the_trace() {
    let out = algrep(&["norm", "x2_f2", "--ext", "2", "--tabulate"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    assert_eq!(r["witness"]["image_size"], 2);
    // exponents of 1+a·b1 over F_4 = (F_2)^2 against the image in F_2
    let table = r["witness"]["table"].as_array().unwrap();
    assert_eq!(table.len(), 4);
}

#[test]
fn corrupted_catalog_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"name\": \"bad\", \"field\": ").unwrap();
    let out = algrep(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
    assert!(out.stdout.is_empty());
}

#[test]
fn non_associative_entry_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"name":"bad","field":{"p":2,"m":1,"modulus":[1,0]},"dim":2,
            "sc":[[[[0],[1]],[[0],[0]]],[[[1],[0]],[[0],[0]]]]}"#,
    )
    .unwrap();
    let out = algrep(&["irreps", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(algrep(&["verify", "u3_f2"]).status.code(), Some(1));
    assert_eq!(algrep(&["verify", "u3_f2", "--ext", "2", "--checks", "nonsense"]).status.code(), Some(1));
    assert_eq!(algrep(&["irreps", "no_such_algebra"]).status.code(), Some(1));
    assert_eq!(algrep(&["--help"]).status.code(), Some(0));
}

#[test]
fn injected_failure_exits_2() {
    let out = algrep(&["verify", "u3_f2", "--ext", "2", "--checks", "isaacs,norms", "--inject-failure", "isaacs"]);
    assert_eq!(out.status.code(), Some(2));
    let recs = records(&out);
    let failed: Vec<&Value> = recs.iter().filter(|r| r["pass"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["check"], "isaacs");
    assert_eq!(failed[0]["witness"]["injected"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED isaacs"));
}

#[test]
fn size_limits_give_skip_records() {
    let out = algrep(&["verify", "u3_f2", "--ext", "2", "--checks", "injectivity", "--max-irrep-order", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["witness"]["skipped"], "size");
    assert_eq!(recs[0]["pass"], true);
}

#[test]
fn output_does_not_depend_on_jobs() {
    let args = |jobs: &'static str| {
        vec!["search-surjectivity", "--max-ext", "2", "--no-timing", "--max-order", "4096", "--jobs", jobs]
    };
    let one = algrep(&args("1"));
    let four = algrep(&args("4"));
    assert_eq!(one.status.code(), Some(0));
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn builtin_catalog_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = algrep(&["catalog", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let written = records(&out);
    assert_eq!(written.len(), 24);
    for r in &written {
        let name = r["algebra"].as_str().unwrap();
        let path = dir.path().join(format!("{name}.json"));
        let from_file = records(&algrep(&["validate", path.to_str().unwrap(), "--no-timing"]));
        let from_builtin = records(&algrep(&["validate", name, "--no-timing"]));
        assert_eq!(from_file, from_builtin);
    }
    let dir_str = dir.path().to_str().unwrap();
    let a = algrep(&["search-surjectivity", "--catalog", dir_str, "--max-order", "1024", "--no-timing"]);
    let b = algrep(&["search-surjectivity", "--catalog", "builtin", "--max-order", "1024", "--no-timing"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn duplicate_names_in_a_catalog_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    algrep(&["catalog", "--out", dir.path().to_str().unwrap()]);
    fs::copy(dir.path().join("x2_f2.json"), dir.path().join("copy.json")).unwrap();
    let out = algrep(&["search-surjectivity", "--catalog", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
