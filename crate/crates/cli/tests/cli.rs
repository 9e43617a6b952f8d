use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdistill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn c1() -> f64 {
    (33.0 - 12.0 * 6f64.sqrt()) / 25.0
}

/// Sum of kets |ij⟩ with coefficients, as a list of [re, im] pairs.
fn vector(terms: &[(usize, usize, f64)]) -> Value {
    let mut v = vec![[0.0, 0.0]; 9];
    let n: f64 = terms.iter().map(|t| t.2 * t.2).sum::<f64>().sqrt();
    for &(i, j, c) in terms {
        v[3 * i + j][0] = c / n;
    }
    serde_json::to_value(v).unwrap()
}

fn write_basis(dir: &Path, name: &str, vectors: Vec<Value>) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(&vectors).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn thresholds_from_the_command_line() {
    let cases = [
        (["--case", "v", "--target", "min-eig", "--lo", "0.1", "--hi", "0.2"], c1()),
        (["--case", "v", "--target", "second-eig", "--lo", "0.2", "--hi", "0.4"], 3.0 / 11.0),
        (["--case", "i", "--target", "min-eig", "--lo", "0.1", "--hi", "0.16"], 1.0 / 7.0),
    ];
    for (args, want) in cases {
        let mut full = vec!["--json", "threshold"];
        full.extend(args);
        let o = run(&full);
        assert_eq!(code(&o), 0);
        let x = json(&o)["x_star"].as_f64().unwrap();
        assert!((x - want).abs() < 1e-8, "{args:?}: {x} vs {want}");
    }
}

#[test]
fn threshold_without_sign_change_is_an_error() {
    let o = run(&["threshold", "--case", "v", "--lo", "0.15", "--hi", "0.2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sign change"));
}

#[test]
fn named_constants_are_accepted() {
    let o = run(&["--json", "threshold", "--case", "v", "--lo", "1/7", "--hi", "0.2"]);
    assert_eq!(code(&o), 0);
    assert!((json(&o)["x_star"].as_f64().unwrap() - c1()).abs() < 1e-8);
    let o = run(&["--json", "witness", "--case", "v", "--x", "c2", "--strategy", "a"]);
    assert_eq!(json(&o)["x"].as_f64().unwrap(), (24.0 * 2f64.sqrt() - 33.0) / 7.0);
    let o = run(&["--json", "witness", "--case", "v", "--x", "1/7", "--strategy", "a"]);
    assert_eq!(json(&o)["x"].as_f64().unwrap(), 1.0 / 7.0);
}

#[test]
fn witness_exit_codes() {
    let o = run(&["--json", "witness", "--case", "v", "--x", "0.5", "--strategy", "a"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["evidence_level"], "certified");
    assert!(doc["witness"]["value"].as_f64().unwrap() < -1e-10);
    assert_eq!(doc["seed"], 0);

    let o = run(&["--json", "witness", "--case", "v", "--x", "1/7", "--strategy", "a+b"]);
    assert_eq!(code(&o), 10);
    let doc = json(&o);
    assert_eq!(doc["evidence_level"], "searched");
    assert!(doc["witness"].is_null());
    assert_eq!(doc["negative_count"], 1);
    assert!(doc["best_value"].as_f64().unwrap() > 0.0);

    let o = run(&["--json", "witness", "--case", "iii", "--x", "0.05"]);
    assert!(matches!(code(&o), 0 | 10));
    assert_eq!(json(&o)["case"], "iii");
}

#[test]
fn witness_with_preconditions() {
    let o = run(&["--json", "witness", "--case", "v", "--x", "1/7", "--strategy", "a", "--preconditions"]);
    assert_eq!(code(&o), 10);
    let items = json(&o)["preconditions"]["items"].as_array().unwrap().clone();
    assert!(items.iter().any(|i| i["id"] == "inertia_one_zero_eight" && i["holds"] == true));
}

#[test]
fn small_budget_is_reported_not_fatal() {
    let o = run(&["--json", "witness", "--case", "v", "--x", "1/7", "--strategy", "a", "--budget", "10"]);
    assert_eq!(code(&o), 10);
    assert_eq!(json(&o)["budget_exhausted"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["witness", "--case", "vi", "--x", "0.5"],
        vec!["witness", "--case", "v", "--x", "1.5"],
        vec!["witness", "--case", "v", "--x", "0.5", "--strategy", "z"],
        vec!["scan", "--case", "v", "--steps", "1"],
        vec!["scan", "--case", "v", "--x-min", "0.5", "--x-max", "0.2"],
        vec!["grid", "--which", "F", "--step", "0"],
        vec!["grid", "--which", "H"],
        vec!["kernel"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn scan_brackets_case_v() {
    let o = run(&["--json", "scan", "--case", "v", "--steps", "1000"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    let brackets = doc["brackets"].as_array().unwrap();
    let has = |q: &str, x: f64| {
        brackets.iter().any(|b| {
            b["quantity"] == q && b["lo"].as_f64().unwrap() <= x && x <= b["hi"].as_f64().unwrap()
        })
    };
    assert!(has("min_eig", c1()));
    assert!(has("min_eig", 3.0 / 11.0));
    assert!(has("second_eig", 3.0 / 11.0));
}

#[test]
fn scan_brackets_case_i() {
    let o = run(&["--json", "scan", "--case", "i", "--steps", "1000", "--no-witness"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    let mins: Vec<(f64, f64)> = doc["brackets"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b["quantity"] == "min_eig")
        .map(|b| (b["lo"].as_f64().unwrap(), b["hi"].as_f64().unwrap()))
        .collect();
    assert_eq!(mins.len(), 2);
    assert!(mins[0].0 <= 1.0 / 7.0 && 1.0 / 7.0 <= mins[0].1);
    assert!(mins[1].0 <= 0.25 && 0.25 <= mins[1].1);
}

#[test]
fn scan_across_the_gap_is_ppt() {
    let o = run(&["scan", "--case", "v", "--x-min", "0.15", "--x-max", "0.27", "--steps", "60"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x,min_eig,second_eig,negative_count,witness,witness_value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 60);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        // oracle: the eigensolver's own minimum eigenvalue column
        assert!(f[1].parse::<f64>().unwrap() >= -1e-12, "{r}");
        assert_eq!(f[3], "0");
        assert_eq!(f[4], "ppt");
    }
}

#[test]
fn scan_writes_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let args = ["--out", &out, "scan", "--case", "v", "--x-min", "0.4", "--x-max", "0.6", "--steps", "11"];
    assert_eq!(code(&run(&args)), 0);
    let csv1 = fs::read(dir.path().join("scan_v.csv")).unwrap();
    let json1 = fs::read(dir.path().join("scan_v.json")).unwrap();
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(csv1, fs::read(dir.path().join("scan_v.csv")).unwrap());
    assert_eq!(json1, fs::read(dir.path().join("scan_v.json")).unwrap());
    assert!(!csv1.contains(&b'\r'));
}

#[test]
fn general_search_is_reproducible_per_seed() {
    let args = ["--json", "--seed", "42", "witness", "--case", "v", "--x", "1/7", "--strategy", "c", "--budget", "400"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 42);
}

#[test]
fn verify_example_coarse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = run(&["--out", &out, "verify-example", "--grid-step", "0.5"]);
    // the printed closed forms disagree with the direct minors, so the
    // battery as a whole fails
    assert_eq!(code(&o), 1);
    let doc: Value = serde_json::from_slice(&fs::read(dir.path().join("verify_example.json")).unwrap()).unwrap();
    assert_eq!(doc["resolution"].as_f64().unwrap(), 0.5);
    for c in doc["checks"].as_array().unwrap() {
        let id = c["id"].as_str().unwrap();
        assert_eq!(c["pass"].as_bool().unwrap(), !id.starts_with("closed_form"), "{id}");
    }
    for name in ["alpha1_psd.csv", "F.csv", "G.csv", "alpha2_minor4.csv", "alpha2_minor5.csv", "alpha2_det.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let f = fs::read_to_string(dir.path().join("F.csv")).unwrap();
    assert!(f.starts_with("re_b,im_b,re_c,im_c,value\n"));
    // 13 × 13 grid for each of five values of c
    assert_eq!(f.lines().count(), 1 + 13 * 13 * 5);
}

#[test]
fn verify_example_outside_the_example_fails_on_inertia() {
    let o = run(&["--json", "verify-example", "--x", "0.5", "--grid-step", "1"]);
    assert_eq!(code(&o), 1);
    let doc = json(&o);
    let inertia = doc["checks"].as_array().unwrap().iter().find(|c| c["id"] == "inertia").unwrap().clone();
    assert_eq!(inertia["pass"], false);
    assert_eq!(doc["inertia"]["negative"], 2);
}

#[test]
fn kernel_from_basis_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = 1.0;
    let case_i = write_basis(
        dir.path(),
        "case_i.json",
        vec![
            vector(&[(0, 0, s)]),
            vector(&[(1, 1, s)]),
            vector(&[(0, 1, s), (1, 0, s)]),
            vector(&[(0, 2, s), (2, 0, s)]),
            vector(&[(1, 2, s), (2, 1, s)]),
        ],
    );
    let o = run(&["--json", "kernel", "--basis", &case_i, "--mode", "exact"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["kernel_dim"], 4);
    assert_eq!(doc["exact"]["found"], true);
    assert!(doc["exact"]["residual"].as_f64().unwrap() <= 1e-12);
    let v = doc["exact_vector"].as_array().unwrap();
    assert_eq!(v[8][0].as_f64().unwrap(), 1.0);

    let case_ii = write_basis(
        dir.path(),
        "case_ii.json",
        vec![
            vector(&[(0, 0, s)]),
            vector(&[(1, 1, s)]),
            vector(&[(2, 2, s)]),
            vector(&[(0, 2, s), (2, 0, s)]),
            vector(&[(1, 2, s), (2, 1, s)]),
        ],
    );
    let o = run(&["--json", "kernel", "--basis", &case_ii]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["exact"]["found"], true);
    assert_eq!(doc["exact_vector"][1][0].as_f64().unwrap(), 1.0);
    assert_eq!(doc["search"]["found"], true);
}

#[test]
fn kernel_of_the_example_state_is_not_found() {
    let o = run(&["--json", "kernel", "--case", "v", "--x", "1/7"]);
    assert_eq!(code(&o), 10);
    let doc = json(&o);
    assert_eq!(doc["search"]["found"], false);
    assert_eq!(doc["search"]["evidence_level"], "searched");
    assert!(doc["search"]["min_objective"].as_f64().unwrap() > 1e-6);
}

#[test]
fn malformed_basis_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "[[1, 2, 3]]").unwrap();
    let o = run(&["kernel", "--basis", &bad.to_string_lossy()]);
    assert_eq!(code(&o), 2);
    fs::write(&bad, "[[[1, 0], [0, 0]]]").unwrap();
    let o = run(&["kernel", "--basis", &bad.to_string_lossy()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn grid_emission() {
    let o = run(&["grid", "--which", "G", "--step", "0.5", "--c", "0,1+1i"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 13 * 13 * 2);
    assert!(csv.ends_with('\n'));

    let o = run(&["--json", "grid", "--which", "F", "--step", "0.25"]);
    let doc = json(&o);
    assert_eq!(doc["which"], "F");
    assert_eq!(doc["scale"].as_f64().unwrap(), 1_075_648.0);
    let m = doc["min_value"].as_f64().unwrap();
    assert!((1.0..=10.0).contains(&m));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["grid"]["points"], 25 * 25);

    let a = run(&["grid", "--which", "alpha2_minor4", "--step", "1", "--re-min", "-2", "--re-max", "2"]);
    let b = run(&["grid", "--which", "alpha2_minor4", "--step", "1", "--re-min", "-2", "--re-max", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn grid_closed_form_fails_where_non_real() {
    let o = run(&["grid", "--which", "F", "--source", "closed-form", "--step", "1", "--c", "1+1i"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-real"));
}
