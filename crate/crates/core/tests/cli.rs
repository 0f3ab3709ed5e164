use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn meetpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meetpd")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn grid_value(csv: &str, point: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{point},")))
        .unwrap_or_else(|| panic!("no row for {point}"))
        .to_string()
}

#[test]
fn matrix_lcm_csv() {
    let o = meetpd(&["matrix", "--family", "divisor", "--d", "2", "--fn", "lcm_pow:1", "--m", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1,1,1,1\n1,2,1,2\n1,1,2,2\n1,2,2,2\n");
}

#[test]
fn matrix_single_point_and_gcd() {
    let o = meetpd(&["matrix", "--d", "3", "--fn", "lcm_pow:2", "--m", "1", "--format", "csv"]);
    assert_eq!(stdout(&o), "1\n");
    let o = meetpd(&["matrix", "--fn", "gcd_pow:1", "--d", "1", "--m", "4"]);
    let j = json_out(&o);
    assert_eq!(j["schema"], 1);
    assert_eq!(j["labels"], json!([1, 2, 3, 4]));
    assert_eq!(j["entries"], json!([["1", "1", "1", "1"], ["1", "2", "1", "2"], ["1", "1", "3", "1"], ["1", "2", "1", "4"]]));
}

#[test]
fn matrix_exact_rationals() {
    let o = meetpd(&["matrix", "--fn", "lcm_pow:-1", "--d", "2", "--m", "2", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().nth(3).unwrap(), "1,1/2,1/2,1/2");
}

#[test]
fn check_exit_codes() {
    assert_eq!(meetpd(&["check", "--fn", "zeta_d", "--d", "2", "--m", "6"]).status.code(), Some(0));
    assert_eq!(meetpd(&["check", "--fn", "gcd_pow:1", "--d", "1", "--m", "20"]).status.code(), Some(0));
    let o = meetpd(&["check", "--fn", "ramanujan_C", "--m", "6"]);
    assert_eq!(o.status.code(), Some(1));
    let j = json_out(&o);
    assert_eq!(j["witness"], json!({ "kind": "element", "element": [1, 2], "value": "-2" }));
    assert_eq!(j["tested_bound"], 6);
    assert_eq!(j["certificate_flag"], false);
}

#[test]
fn check_on_min_family() {
    // f(n) = n on a chain inverts to the constant 1
    assert_eq!(meetpd(&["check", "--family", "min", "--fn", "gcd_pow:1", "--d", "1", "--m", "9"]).status.code(), Some(0));
    // gcd(x, y) is not PD for the MIN order: f(2,3) - f(1,3) - f(2,2) + f(1,2) = -1
    let o = meetpd(&["check", "--family", "min", "--fn", "gcd_pow:1", "--d", "2", "--m", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["witness"], json!({ "kind": "element", "element": [2, 3], "value": "-1" }));
    assert_eq!(meetpd(&["check", "--family", "min", "--fn", "mu_d", "--m", "4"]).status.code(), Some(1));
}

#[test]
fn decompose_outputs() {
    let j = json_out(&meetpd(&["decompose", "--family", "divisor", "--d", "2", "--m", "2", "--fn", "lcm_pow:1"]));
    assert_eq!(j["residual"], "0");
    assert!(j["diag"].as_array().unwrap().iter().any(|v| v.as_str().unwrap().starts_with('-')));
    assert_eq!(j["order_map"]["dims"], json!([2, 2]));
    assert_eq!(j["order_map"]["multi_indices"][2], json!([1, 0]));

    let j = json_out(&meetpd(&["decompose", "--d", "3", "--m", "1", "--fn", "lcm_pow:1"]));
    assert_eq!(j["diag"], json!(["1"]));

    let j = json_out(&meetpd(&["decompose", "--d", "1", "--m", "4", "--fn", "gcd_pow:1"]));
    assert_eq!(j["diag"], json!(["1", "1", "2", "2"]));

    let csv = stdout(&meetpd(&["decompose", "--d", "1", "--m", "4", "--fn", "gcd_pow:1", "--format", "csv"]));
    assert_eq!(csv, "i1,value\n1,1\n2,1\n3,2\n4,2\n");
}

#[test]
fn grid_values() {
    let div = stdout(&meetpd(&["grid", "--family", "divisor", "--m", "10"]));
    let min = stdout(&meetpd(&["grid", "--family", "min", "--m", "10"]));
    assert!(div.starts_with("i1,i2,value\n"));
    assert_eq!(div.lines().count(), 101);
    assert_eq!(grid_value(&div, "2,3"), "4");
    assert_eq!(grid_value(&min, "2,3"), "6");
    assert_eq!(grid_value(&div, "1,1"), "1");
    assert_eq!(grid_value(&min, "1,1"), "1");
    assert_eq!(grid_value(&div, "10,6"), "16");
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let p = path.to_str().unwrap();
    let o = meetpd(&["matrix", "--fn", "gcd_pow:1", "--m", "3", "--format", "csv", "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), "1,1,1\n1,2,1\n1,1,3\n");
}

fn round_trip(dir: &Path, d: &str, f: &str, m: &str) {
    let path = dir.join(format!("{f}-{d}-{m}.json"));
    let p = path.to_str().unwrap();
    let o = meetpd(&["matrix", "--d", d, "--fn", f, "--m", m, "--out", p]);
    assert_eq!(o.status.code(), Some(0));
    let direct = meetpd(&["check", "--d", d, "--fn", f, "--m", m]);
    let table = meetpd(&["check", "--d", d, "--fn", &format!("table:{p}"), "--m", m]);
    assert_eq!(direct.status.code(), table.status.code(), "{f} d={d} m={m}");
    assert_eq!(json_out(&direct), json_out(&table), "{f} d={d} m={m}");
}

#[test]
fn matrix_output_reingests_as_table() {
    let dir = tempfile::tempdir().unwrap();
    round_trip(dir.path(), "2", "lcm_pow:1", "3");
    round_trip(dir.path(), "1", "gcd_pow:1", "6");
    round_trip(dir.path(), "2", "ramanujan_C", "6");
    round_trip(dir.path(), "2", "gcd_pow:2", "4");
}

#[test]
fn hasse_family_with_table() {
    let dir = tempfile::tempdir().unwrap();
    let hasse = dir.path().join("diamond.txt");
    fs::write(&hasse, "# diamond\nelem 0\nelem a\nelem b\nelem 1\nedge 0 a\nedge 0 b\nedge a 1\nedge b 1\n").unwrap();
    let good = dir.path().join("good.csv");
    fs::write(&good, "id,value\n0,1\na,2\nb,2\n1,3\n").unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0,1\na,2\nb,2\n1,2\n").unwrap();
    let h = hasse.to_str().unwrap();
    let run = |t: &Path| meetpd(&["check", "--family", "hasse", "--hasse", h, "--fn", &format!("table:{}", t.display()), "--m", "1"]);
    assert_eq!(run(&good).status.code(), Some(0));
    let o = run(&bad);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json_out(&o)["witness"], json!({ "kind": "element", "element": "1", "value": "-1" }));
    let o = meetpd(&["matrix", "--family", "hasse", "--hasse", h, "--fn", &format!("table:{}", good.display()), "--format", "csv", "--m", "1"]);
    assert_eq!(stdout(&o), "1,1,1,1\n1,2,1,2\n1,1,2,2\n1,2,2,3\n");
}

#[test]
fn error_exit_codes() {
    assert_eq!(meetpd(&["check", "--fn", "nope", "--m", "3"]).status.code(), Some(2));
    assert_eq!(meetpd(&["check", "--fn", "zeta_d", "--m", "3", "--tol=-1"]).status.code(), Some(2));
    assert_eq!(meetpd(&["check", "--fn", "table:/nonexistent/file.csv", "--m", "3"]).status.code(), Some(2));
    assert_eq!(meetpd(&["check", "--family", "hasse", "--fn", "zeta_d", "--m", "1"]).status.code(), Some(2));
    assert_eq!(meetpd(&["matrix", "--m", "2"]).status.code(), Some(2));
    assert_eq!(meetpd(&["check", "--fn", "gcd_pow:1/2", "--m", "2"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let partial = dir.path().join("partial.csv");
    fs::write(&partial, "1,1,1\n").unwrap();
    let o = meetpd(&["check", "--d", "2", "--fn", &format!("table:{}", partial.display()), "--m", "2"]);
    assert_eq!(o.status.code(), Some(3));
}
