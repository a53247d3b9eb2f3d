use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use panelbounds::io::read_panel;
use panelbounds_core::npbounds::{static_bounds_from_data, OutcomeBounds};
use panelbounds_core::panel::{enumerate_support, EffectQuery};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_panelbounds"));
    c.env_remove("PANELBOUNDS_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn simulated_panel(dir: &Path, n: &str, seed: &str) -> PathBuf {
    let path = dir.join("panel.csv");
    let out = run(&[
        "simulate",
        "--dgp",
        "ht",
        "--T",
        "2",
        "--pX",
        "0.5",
        "--n",
        n,
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    json_of(&out);
    path
}

/// Numbers within `tol`, everything else equal.
fn assert_close(a: &Value, b: &Value, tol: f64, at: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{at}: {x} vs {y}");
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{at}: length");
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                assert_close(u, v, tol, &format!("{at}[{i}]"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>(), "{at}: keys");
            for (k, u) in x {
                assert_close(u, &y[k], tol, &format!("{at}.{k}"));
            }
        }
        _ => assert_eq!(a, b, "{at}"),
    }
}

#[test]
fn simulate_then_bounds_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_panel(dir.path(), "400", "11");
    let doc = json_of(&run(&["bounds", "--data", path.to_str().unwrap(), "--x-tilde", "1", "--x-bar", "0"]));
    assert_eq!(doc["format_version"], "1");
    assert_eq!(doc["command"], "bounds");

    let data = read_panel(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(data.n(), 400);
    let index = enumerate_support(&data, false).unwrap();
    let est =
        static_bounds_from_data(&data, &index, &EffectQuery::binary(), OutcomeBounds::new(0.0, 1.0).unwrap(), false)
            .unwrap();
    assert_eq!(doc["result"]["mu_lower"].as_f64().unwrap(), est.mu_lower);
    assert_eq!(doc["result"]["mu_upper"].as_f64().unwrap(), est.mu_upper);
}

#[test]
fn setid_on_exact_logit_cells_matches_golden() {
    let out = bin()
        .current_dir(fixtures())
        .args(["setid", "--link", "logit", "--cells", "logit_t2_cells.json"])
        .args(["--beta-min", "0.8", "--beta-max", "1.2", "--beta-step", "0.05", "--epsilon", "0"])
        .output()
        .unwrap();
    let doc = json_of(&out);
    let golden: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("setid_logit_t2.json")).unwrap()).unwrap();
    assert_close(&doc, &golden, 1e-9, "$");
    assert_eq!(doc["result"]["members"], serde_json::json!([1.0]));
}

#[test]
fn malformed_csv_exits_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "id,t,y,x1\n1,1,0,1\n1,1,1,0\n2,1,0,1\n2,2,1,1\n").unwrap();
    let out = run(&["bounds", "--data", path.to_str().unwrap(), "--x-tilde", "1", "--x-bar", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("repeated (lines 2, 3)"), "{err}");
    assert!(err.contains("missing period(s) 2"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["bounds"]).status.code(), Some(2));
    assert_eq!(run(&["infer", "--data", "x.csv", "--method", "nope"]).status.code(), Some(2));
    let out = run(&["setid", "--link", "logit", "--cells", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}

#[test]
fn vector_query_needs_distance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    std::fs::write(&path, "id,t,y,x1,x2\n1,1,0,0,1\n1,2,1,1,0\n2,1,1,1,0\n2,2,0,0,1\n").unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["bounds", "--data", p, "--x-tilde", "1,0", "--x-bar", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--distance"));
    json_of(&run(&["bounds", "--data", p, "--x-tilde", "1,0", "--x-bar", "0,1", "--distance", "1"]));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = out.to_str().unwrap();
    let with_env = bin().env("PANELBOUNDS_SEED", "42").args(["simulate", "--n", "20", "--out", o]).output().unwrap();
    assert_eq!(json_of(&with_env)["config"]["seed"], 42);
    let from_env = std::fs::read(&out).unwrap();
    json_of(&run(&["simulate", "--n", "20", "--seed", "42", "--out", o]));
    assert_eq!(from_env, std::fs::read(&out).unwrap());
    assert_eq!(json_of(&run(&["simulate", "--n", "20", "--out", o]))["config"]["seed"], 0);
    let bad = bin().env("PANELBOUNDS_SEED", "abc").args(["simulate", "--n", "20", "--out", o]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn emit_csv_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let cells = fixtures().join("logit_t2_cells.json");
    let doc = json_of(&run(&[
        "setid",
        "--link",
        "logit",
        "--cells",
        cells.to_str().unwrap(),
        "--beta-min",
        "0.9",
        "--beta-max",
        "1.1",
        "--beta-step",
        "0.1",
        "--emit-csv",
        prefix.to_str().unwrap(),
    ]));
    let objective = std::fs::read_to_string(dir.path().join("run_objective.csv")).unwrap();
    let lines: Vec<&str> = objective.lines().collect();
    assert_eq!(lines[0], "beta,objective,member");
    assert_eq!(lines.len(), 1 + doc["result"]["beta_grid"].as_array().unwrap().len());
    let bounds = std::fs::read_to_string(dir.path().join("run_bounds.csv")).unwrap();
    assert_eq!(bounds.lines().count(), 5);
}

#[test]
fn canonical_empty_region_is_a_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_panel(dir.path(), "300", "2");
    let doc = json_of(&run(&[
        "infer",
        "--data",
        path.to_str().unwrap(),
        "--method",
        "canonical",
        "--draws",
        "40",
        "--beta-min",
        "5",
        "--beta-max",
        "6",
        "--beta-step",
        "0.5",
    ]));
    assert_eq!(doc["result"]["empty"], true);
    assert!(doc["result"]["min_statistic"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_panel(dir.path(), "300", "5");
    let p = path.to_str().unwrap();
    let grid = ["--beta-min", "0.5", "--beta-max", "1.5", "--beta-step", "0.1"];
    let cases: Vec<Vec<&str>> = vec![
        [&["infer", "--data", p, "--method", "mp", "--draws", "60"][..], &grid[..]].concat(),
        [&["infer", "--data", p, "--method", "pb", "--R", "4", "--inner", "3", "--seed", "9"][..], &grid[..]].concat(),
        vec!["bounds", "--data", p, "--ci", "boot", "--reps", "50", "--seed", "3"],
    ];
    for args in cases {
        let base = run(&args).stdout;
        assert!(!base.is_empty());
        for threads in ["1", "3"] {
            let again = run(&[&["--threads", threads][..], &args[..]].concat());
            assert_eq!(base, again.stdout, "{args:?} with {threads} threads");
        }
    }
}
