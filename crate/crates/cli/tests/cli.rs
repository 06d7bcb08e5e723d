use std::path::Path;
use std::process::{Command, Output};

fn vpf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const WORKED: &str = "# two equations, four columns\n2 4\n1 2 1 0\n1 1 0 1\n";

#[test]
fn count_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", WORKED);
    let o = vpf(&["count", "--matrix", &m, "--rhs", "5,4", "--method", "both"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "symbolic: 11\noracle: 11\n");
    let o = vpf(&["count", "--matrix", &m, "--rhs", "-1,0"]);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn ehrhart_from_matrix_and_polytope() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", WORKED);
    let p = write(dir.path(), "p.txt", "1 2 <= 5\n1 1 <= 4\n");
    let a = vpf(&["ehrhart", "--matrix", &m, "--rhs", "5,4"]);
    let b = vpf(&["ehrhart", "--polytope", &p]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("degree 2, period 2"));
}

#[test]
fn symbolic_json_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", WORKED);
    let j1 = dir.path().join("1.json");
    let j2 = dir.path().join("2.json");
    let o = vpf(&["symbolic", "--matrix", &m, "--json", j1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("piece ").count(), 3);
    let o = vpf(&["symbolic", "--matrix", &m, "--order", "paper", "--json", j2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&j1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&j2).unwrap());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["version"], "vpf-1");
    assert_eq!(v["kind"], "piecewise");
    assert_eq!(v["pieces"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_passes_on_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", WORKED);
    let o = vpf(&["verify", "--matrix", &m, "--max-rhs", "15", "--samples", "40", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("bad.txt", "2 3\n1 2\n"), ("zero.txt", "1 2\n1 0\n"), ("neg.txt", "1 2\n1 -1\n")] {
        let m = write(dir.path(), name, text);
        let o = vpf(&["count", "--matrix", &m, "--rhs", "1"]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        assert!(o.stdout.is_empty());
    }
    let m = write(dir.path(), "a.txt", WORKED);
    assert_eq!(vpf(&["count", "--matrix", &m, "--rhs", "1,2,3"]).status.code(), Some(2));
    let p = write(dir.path(), "open.txt", "1 -1 <= 2\n");
    assert_eq!(vpf(&["ehrhart", "--polytope", &p]).status.code(), Some(2));
    assert_eq!(vpf(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn oracle_limit_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", "3 3\n1 1 1\n1 2 1\n2 1 1\n");
    let o = vpf(&["count", "--matrix", &m, "--rhs", "5000,5000,5000", "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(4));
}
