use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coincide"));
    c.env_remove("COINCIDE_GROUP_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SL2_3: &str = r#"{"modulus": 3, "generators": [[0, -1, 1, 0], [1, 1, 0, 1]]}"#;
const GL2_3: &str = r#"{"modulus": 3, "generators": [[0, -1, 1, 0], [1, 1, 0, 1], [2, 0, 0, 1]]}"#;

#[test]
fn derived_subgroup_of_sl2_3() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sl2_3.json", SL2_3);
    let out = run(&["--json", "group", "derived", "--in", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["index"], 3);
    assert_eq!(v["derived"]["order"], 8);
    let text = run(&["group", "derived", "--in", s(&f)]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("order 8 and index 3"));
}

#[test]
fn gl2_3_lifts_to_9() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "gl2_3.json", GL2_3);
    let out = run(&["--json", "lift", "split", "--group", s(&f), "--to", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "liftable");
    assert_eq!(v["witness"]["order"], 48);
    assert_eq!(v["witness"]["modulus"], 9);
}

#[test]
fn negative_answers_exit_with_one() {
    let out = run(&["--json", "lift", "element", "--matrix", "1,1,0,1", "--mod", "5", "--to", "25"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["status"], "not_liftable");
    let out = run(&["lift", "element", "--matrix", "1,1;0,1", "--mod", "2", "--to", "4"]);
    assert_eq!(out.status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let f = write(&dir, "q.json", r#"{"field_disc_primes": [], "zeta_in_F": [2]}"#);
    let out = run(&["--json", "audit", "--record", s(&f), "--m", "3", "--n", "9"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["overall"], "obstructed");
    let r4 = v["findings"].as_array().unwrap().iter().find(|f| f["rule"] == "R4").unwrap();
    assert_eq!(r4["verdict"], "obstructed");
    assert!(r4["citation"].as_str().unwrap().starts_with("R4 / "));
    let out = run(&["audit", "--record", s(&f), "--m", "2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall: not obstructed"));
}

#[test]
fn two_curve_audit() {
    let dir = TempDir::new().unwrap();
    let e = write(&dir, "e.json", r#"{"field_disc_primes": [], "conductor_norm_primes": [11], "local": [{"residue_characteristic": 7, "ideals": [{"e": 1, "reduction": "good"}]}]}"#);
    let e2 = write(&dir, "e2.json", r#"{"field_disc_primes": [], "conductor_norm_primes": [7]}"#);
    let out = run(&["--json", "audit", "--record", s(&e), "--record2", s(&e2), "--m", "3", "--n", "21"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["two_curve"], true);
    let rules: Vec<&str> = v["findings"].as_array().unwrap().iter().map(|f| f["rule"].as_str().unwrap()).collect();
    assert_eq!(rules, ["R1'", "R2'", "R3'", "R4'"]);
    let other = write(&dir, "e3.json", r#"{"field_disc_primes": [3]}"#);
    let out = run(&["audit", "--record", s(&e), "--record2", s(&other), "--m", "3", "--n", "21"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_inputs_name_file_and_field() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "rec.json", r#"{"local": [{"residue_characteristic": 5, "ideals": [{"e": 1, "reduction": "weird"}]}]}"#);
    let out = run(&["audit", "--record", s(&f), "--m", "2", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rec.json"), "{err}");
    assert!(err.contains("local[0].ideals[0].reduction"), "{err}");

    let g = write(&dir, "g.json", r#"{"modulus": 4, "generator": [[0, 1, 1, 0]]}"#);
    let out = run(&["group", "info", "--in", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g.json"));

    let g = write(&dir, "sing.json", r#"{"modulus": 4, "generators": [[2, 0, 0, 1]]}"#);
    assert_eq!(run(&["group", "info", "--in", s(&g)]).status.code(), Some(2));
    let g = write(&dir, "ord.json", r#"{"modulus": 4, "generators": [[0, 1, 1, 0]], "order": 4}"#);
    let out = run(&["group", "info", "--in", s(&g)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field `order`"));
    assert_eq!(run(&["group", "info", "--in", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn group_file_round_trips_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "g.json", GL2_3);
    let out = run(&["--json", "group", "info", "--in", s(&f), "--elements"]);
    let v = json_of(&out);
    assert_eq!(v["group"]["order"], 48);
    assert_eq!(v["index_in_gl2"], "1");
    let again = write(&dir, "again.json", &v["group"].to_string());
    let out2 = json_of(&run(&["--json", "group", "info", "--in", s(&again), "--elements"]));
    assert_eq!(out2["group"]["elements"], v["group"]["elements"]);
}

#[test]
fn other_group_commands() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "gl.json", GL2_3);
    let v = json_of(&run(&["--json", "group", "abelian", "--in", s(&f)]));
    assert_eq!(v["invariants"], serde_json::json!([2]));
    let v = json_of(&run(&["--json", "group", "det", "--in", s(&f)]));
    assert_eq!(v["det_image"], serde_json::json!([1, 2]));
    let v = json_of(&run(&["--json", "group", "sl", "--in", s(&f)]));
    assert_eq!(v["sl"]["order"], 24);
    let sw = write(&dir, "sw.json", r#"{"modulus": 4, "generators": [[0, 1, 1, 0]]}"#);
    let out = run(&["--json", "group", "conjugate", "--in", s(&sw), "--matrix", "1,1,0,1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--json", "group", "conjugate", "--in", s(&f), "--matrix", "1,-1,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_of(&out)["conjugator"].is_array());
    let g6 = write(&dir, "g6.json", r#"{"modulus": 6, "generators": [[0, -1, 1, 0], [1, 1, 0, 1], [5, 0, 0, 1]]}"#);
    let v = json_of(&run(&["--json", "group", "fiber", "--in", s(&g6), "--m", "2", "--n", "3"]));
    assert_eq!(v["trivial_fiber_product"], true);
    let v = json_of(&run(&["--json", "group", "reduce", "--in", s(&g6), "--to", "3"]));
    assert_eq!(v["group"]["order"], 48);
    assert_eq!(v["injective"], false);
}

#[test]
fn kernel_and_complement() {
    let v = json_of(&run(&["--json", "lift", "kernel", "--from", "3", "--to", "9"]));
    assert_eq!(v["order"], 81);
    assert_eq!(v["exponent"], 3);
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "b.json", r#"{"modulus": 25, "generators": [[1, 1, 0, 1], [6, 0, 0, 1], [1, 5, 0, 1], [1, 0, 5, 1], [1, 0, 0, 6]]}"#);
    let out = run(&["--json", "lift", "complement", "--group", s(&b), "--base", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["splits"], false);
    let out = run(&["--json", "--budget", "2", "lift", "split", "--group", s(&write(&dir, "g.json", GL2_3)), "--to", "9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["status"], "exhausted");
}

#[test]
fn padic_commands_on_40a4() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "img.json", r#"{"p": 2, "depth": 2, "group": {"modulus": 4, "generators": [[0, 1, 1, 0]]}}"#);
    let v = json_of(&run(&["--json", "padic", "profile", "--in", s(&f), "--kmax", "4"]));
    assert_eq!(v["u"], serde_json::json!([16, 1, 1]));
    let v = json_of(&run(&["--json", "padic", "coincidences", "--in", s(&f), "--kmax", "4"]));
    assert_eq!(v["levels"], serde_json::json!([1]));
    let out = run(&["padic", "coincidences", "--in", s(&f)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("(2, 4)"));
    assert_eq!(run(&["padic", "monotone", "--in", s(&f)]).status.code(), Some(0));
    let v = json_of(&run(&["--json", "padic", "bound", "--p", "2", "--k", "1"]));
    assert_eq!(v["bound"], "16");
}

#[test]
fn xcurve_commands() {
    let v = json_of(&run(&["--json", "xcurve", "eval", "--t", "1"]));
    assert_eq!(v["j"], "-36");
    let out = run(&["xcurve", "eval", "--t", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", r#"["0", 1728, "-1188"]"#);
    let v = json_of(&run(&["--json", "xcurve", "search", "--height", "5", "--targets", s(&t)]));
    assert_eq!(v["preimages"]["0"], serde_json::json!([]));
    assert_eq!(v["preimages"]["-1188"], serde_json::json!(["-3", "0"]));
    let out = run(&["--json", "xcurve", "search", "--height", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["preimages"].as_object().unwrap().len(), 13);
}

#[test]
fn group_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "gl.json", GL2_3);
    let out = bin().args(["group", "info", "--in", s(&f)]).env("COINCIDE_GROUP_CAP", "10").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("10"));
    let out = run(&["--cap", "100", "group", "info", "--in", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_paper_is_deterministic() {
    let a = run(&["verify-paper"]);
    let b = run(&["verify-paper"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("0 failed"));
    assert!(text.contains("SKIPPED  table-15.a1-p2"));
    assert!(text.contains("PASSED   table-40.a4-p2"));
    let v = json_of(&run(&["--json", "verify-paper"]));
    assert_eq!(v["failed"], 0);
    let ids: Vec<&str> = v["fixtures"].as_array().unwrap().iter().map(|f| f["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn verify_paper_reports_failures() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", r#"[{"id": "bad", "description": "wrong order", "citation": "none", "basis": "trivial",
        "check": {"kind": "gl2_order", "n": 2}, "expected": {"formula": 7}}]"#);
    let out = run(&["verify-paper", "--corpus", s(&c)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED   bad"));
}
