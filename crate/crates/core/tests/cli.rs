use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn choquard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choquard")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn solve_reports_the_ground_state() {
    let out = choquard(&["solve", "--dim", "3", "--p", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["version"], "choquard 0.1.0");
    assert_eq!(v["command"], "solve");
    assert_eq!(v["config"]["dim"], 3);
    let summary = &v["summary"];
    let u0 = summary["u0_star"].as_f64().unwrap();
    assert!((u0 - 1.0886370794).abs() < 1e-8);
    assert!(summary["v_inf"].as_f64().unwrap() > 1.0);
    assert!(summary["decay_k"].as_f64().unwrap() > 0.0);
    assert!(v["trajectory"].as_array().unwrap().len() > 100);
}

#[test]
fn loose_tolerance_returns_the_bracket_midpoint() {
    let out = choquard(&["solve", "--dim", "3", "--p", "2", "--tol", "10"]);
    assert_eq!(code(&out), 0);
    let s = &json(&out)["summary"];
    assert_eq!(s["iterations"], 0);
    let (lo, hi) = (s["bracket_lo"].as_f64().unwrap(), s["bracket_hi"].as_f64().unwrap());
    assert_eq!(s["u0_star"].as_f64().unwrap(), 0.5 * (lo + hi));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve", "--dim", "1", "--p", "2"][..],
        &["classify", "--u0", "-1"],
        &["transform", "--dim", "2", "--p", "1", "--lambda", "1", "--gamma", "1"],
        &["sweep", "--from", "0", "--to", "1"],
        &["bogus"],
    ] {
        let out = choquard(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = choquard(&["transform", "--dim", "2", "--p", "1", "--lambda", "1", "--gamma", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("N=2 transform unsupported"));
}

#[test]
fn classify_verdicts_and_undetermined_code() {
    let out = choquard(&["classify", "--dim", "3", "--p", "2", "--u0", "0.2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["record"]["tag"], "InN");
    let out = choquard(&["classify", "--dim", "3", "--p", "2", "--u0", "50"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["record"]["tag"], "InP");
    let out = choquard(&["classify", "--u0", "0.2", "--r-max-initial", "0.5", "--r-max-cap", "1"]);
    assert_eq!(code(&out), 5);
    assert_eq!(json(&out)["record"]["tag"], "Undetermined");
}

#[test]
fn sweeps_partition_the_grid() {
    let out = choquard(&["sweep", "--dim", "3", "--p", "2", "--from", "0.05", "--to", "0.24", "--count", "20"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# choquard 0.1.0\n"));
    assert!(text.lines().any(|l| l == "u0,tag,r_event"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("InN")));

    let out = choquard(&["sweep", "--from", "1", "--to", "128", "--count", "8", "--log"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let tags: Vec<&str> = data_rows(&text).iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(tags.len(), 8);
    let first_p = tags.iter().position(|t| *t == "InP").expect("some InP rows");
    assert!(first_p > 0);
    assert!(tags[..first_p].iter().all(|t| *t == "InN") && tags[first_p..].iter().all(|t| *t == "InP"), "{tags:?}");

    let out = choquard(&["sweep", "--count", "0"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(data_rows(&text).is_empty());
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), vec!["u0,tag,r_event"]);
}

#[test]
fn verify_passes_in_three_and_two_dimensions() {
    let out = choquard(&["verify", "--dim", "3", "--p", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let entries = v["outcome"]["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["status"] == "PASSED"));

    let out = choquard(&["verify", "--dim", "2", "--p", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let entries = v["outcome"]["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["status"] != "FAILED"));
    let skipped: Vec<&str> =
        entries.iter().filter(|e| e["status"] == "SKIPPED").map(|e| e["name"].as_str().unwrap()).collect();
    assert!(skipped.contains(&"pde_residual"));
    assert!(skipped.contains(&"round_trip"));
}

#[test]
fn corrupted_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# settings\ndim = 3\np = two\n").unwrap();
    let out = choquard(&["--config", path.to_str().unwrap(), "solve"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":3:"), "{err}");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "dim = 4\np = 1\n").unwrap();
    let out = choquard(&["--config", path.to_str().unwrap(), "classify", "--u0", "0.2", "--p", "1.5"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["config"]["dim"], 4);
    assert_eq!(v["config"]["p"], 1.5);
}

fn scaling_line(csv: &str, key: &str) -> f64 {
    let prefix = format!("# {key} = ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
}

#[test]
fn transform_scales_with_lambda() {
    let one = choquard(&["transform", "--dim", "3", "--p", "2", "--lambda", "1", "--gamma", "1"]);
    let four = choquard(&["transform", "--dim", "3", "--p", "2", "--lambda", "4", "--gamma", "1"]);
    assert_eq!((code(&one), code(&four)), (0, 0));
    let (one, four) = (String::from_utf8(one.stdout).unwrap(), String::from_utf8(four.stdout).unwrap());
    assert!(one.lines().any(|l| l == "r,u_lambda,v_lambda"));
    let (s1, s4) = (scaling_line(&one, "sigma"), scaling_line(&four, "sigma"));
    assert!((s4 - 2.0 * s1).abs() <= 1e-15 * s4);
    let first = data_rows(&one)[0];
    let fields: Vec<f64> = first.split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields[0], 0.0);
}

#[test]
fn output_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = choquard(&["--format", "csv", "-o", path.to_str().unwrap(), "solve", "--dim", "4", "--p", "1.5"]);
        assert_eq!(code(&out), 0);
    }
    let strip = |p: &std::path::Path| {
        fs::read_to_string(p).unwrap().lines().filter(|l| !l.starts_with("# output = ")).collect::<Vec<_>>().join("\n")
    };
    let (ta, tb) = (strip(&a), strip(&b));
    assert_eq!(ta, tb);
    assert!(ta.lines().any(|l| l == "r,u,up,v,vp"));

    let out1 = choquard(&["verify", "--dim", "3", "--p", "1", "--seed", "7"]);
    let out2 = choquard(&["verify", "--dim", "3", "--p", "1", "--seed", "7"]);
    assert_eq!(out1.stdout, out2.stdout);
}
