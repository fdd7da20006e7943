use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coercive-bvp"))
}

fn bundle(dir: &Path) -> PathBuf {
    let out = dir.join("problems");
    let status = exe().arg("bundle").arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    out
}

fn run(args: &[&str], problem: &Path, out: &Path) -> Output {
    exe()
        .args(args)
        .arg("--problem")
        .arg(problem)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn solve_linear_writes_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let problems = bundle(dir.path());
    let out = dir.path().join("solve");
    let o = run(&["solve"], &problems.join("linear.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let mut rdr = csv::Reader::from_path(out.join("solution.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["k", "x", "residual"]);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[2].parse().unwrap();
        assert!(r.abs() <= 1e-10, "{r}");
        rows += 1;
    }
    assert_eq!(rows, 10);

    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["converged"], Value::Bool(true));
}

#[test]
fn malformed_problem_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"kind": "dirichlet", "T": 3, "p": [1, 1], "g": [0, 0, 0], "f": {"name": "zero"}, "M": 1}"#,
    )
    .unwrap();
    let o = run(&["solve"], &path, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(!stderr.contains("unknown field"), "{stderr}");
    assert!(stderr.contains("field `p`"), "{stderr}");
}

#[test]
fn missing_problem_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve"], &dir.path().join("absent.json"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_flags_exit_with_three() {
    let o = exe().args(["solve", "--frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = exe().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_reports_every_assumption() {
    let dir = tempfile::tempdir().unwrap();
    let problems = bundle(dir.path());
    let out = dir.path().join("validate");
    let o = run(&["validate"], &problems.join("example1.json"), &out);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 1);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("assumptions.json")).unwrap()).unwrap();
    let ids: Vec<&str> = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    for id in ["A1", "A2", "A3", "A4", "A5", "A6"] {
        assert!(ids.contains(&id), "{ids:?}");
    }
    assert!(report["apriori_bound"]["bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn spectrum_of_emden_example() {
    let dir = tempfile::tempdir().unwrap();
    let problems = bundle(dir.path());
    let out = dir.path().join("spectrum");
    let o = run(&["spectrum"], &problems.join("example2_emden.json"), &out);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.starts_with("lambda_min,lambda_max,positive_definite"),
        "{stdout}"
    );
    assert!(stdout.contains("true"));
    let rows = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(rows.lines().count(), 7);
}

#[test]
fn indefinite_emden_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("indef.json");
    std::fs::write(
        &path,
        r#"{"kind": "emden", "T": 3, "p": [1, 1, 1, 1], "q": [0, 0, 0], "g": [1, 0, 0],
            "f": {"name": "zero"}, "M": 1, "r": 1.5}"#,
    )
    .unwrap();
    let o = run(&["solve"], &path, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_agrees_on_small_problem() {
    let dir = tempfile::tempdir().unwrap();
    let problems = bundle(dir.path());
    let out = dir.path().join("oracle");
    let o = run(&["oracle", "--points", "41"], &problems.join("parabola.json"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("oracle.csv")).unwrap();
    let objective = rdr
        .records()
        .map(|r| r.unwrap())
        .find(|r| &r[0] == "objective")
        .unwrap();
    let (s, o): (f64, f64) = (objective[1].parse().unwrap(), objective[2].parse().unwrap());
    assert!(s <= o + 1e-8);
}
