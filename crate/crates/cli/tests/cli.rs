use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minimax"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn classify_bilinear() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", "--builtin", "bilinear"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["strict_non_minimax"], Value::Bool(false));
    for v in report["verdicts"].as_array().unwrap() {
        let expected = if v["method"] == "gda_tt" { "unstable" } else { "stable" };
        assert_eq!(v["stable"].as_str().unwrap().to_lowercase(), expected, "{v}");
    }
    assert!(report["mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn classify_scalar_degenerate_threshold() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", "--builtin", "scalar_degenerate", "--a", "2", "--c", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("report.json"));
    assert!((report["s0"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn classify_rejects_non_stationary_point() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", "--builtin", "bilinear", "--z0", "1,0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn classify_search_finds_the_origin() {
    let dir = TempDir::new().unwrap();
    let out = run(&["classify", "--builtin", "bilinear", "--z0", "0.3,-0.2", "--search"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("report.json"));
    for x in report["point"].as_array().unwrap() {
        assert!(x.as_f64().unwrap().abs() < 1e-8);
    }
}

#[test]
fn bad_arguments_exit_with_input_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["classify", "--builtin", "nope"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["classify"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--builtin", "bilinear", "--eps-grid", "1:2"], dir.path()).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "--builtin", "bilinear", "--method", "eg_tt", "--eta", "0.5", "--tau", "0.5"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn problem_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let out = run(&["classify", "--builtin", "scalar_degenerate", "--a", "3", "--c", "-2"], &first);
    assert_eq!(out.status.code(), Some(0));
    let problem = first.join("problem.json");
    let second = dir.path().join("second");
    let out = run(&["classify", "--problem", problem.to_str().unwrap()], &second);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (a, b) = (json(&first.join("report.json")), json(&second.join("report.json")));
    assert_eq!(a["sigma"], b["sigma"]);
    assert_eq!(a["iota"], b["iota"]);
    assert_eq!(a["verdicts"], b["verdicts"]);
}

fn converged_fraction(method: &str) -> f64 {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["simulate", "--builtin", "bilinear", "--method", method, "--eta", "0.5", "--tau", "10", "--n", "100"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    json(&dir.path().join("summary.json"))["summary"]["converged_fraction"].as_f64().unwrap()
}

#[test]
fn simulate_bilinear_eg_converges_and_gda_does_not() {
    assert_eq!(converged_fraction("eg_tt"), 1.0);
    assert_eq!(converged_fraction("gda_tt"), 0.0);
}

#[test]
fn simulate_empty_ensemble() {
    let dir = TempDir::new().unwrap();
    let out = run(&["simulate", "--builtin", "bilinear", "--n", "0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["summary"]["n"], 0);
    assert!(summary["members"].as_array().unwrap().is_empty());
    assert!(summary["summary"]["clusters"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["simulate", "--builtin", "strict_nonminimax_demo", "--n", "8", "--seed", "7", "--record-every", "10"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&args, &a).status.code(), Some(0));
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(run(&seq, &b).status.code(), Some(0));
    for i in 0..8 {
        let name = format!("trajectories/traj_{i:05}.csv");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    assert_eq!(json(&a.join("summary.json")), json(&b.join("summary.json")));
}

#[test]
fn avoidance_strict_non_minimax_demo() {
    let dir = TempDir::new().unwrap();
    let out = run(&["avoidance", "--builtin", "strict_nonminimax_demo", "--method", "eg_tt", "--n", "200"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("avoidance.json"));
    assert_eq!(summary["fraction"].as_f64().unwrap(), 0.0);
    assert_eq!(summary["passed"], Value::Bool(true));
}

#[test]
fn avoidance_degenerate_gda() {
    let dir = TempDir::new().unwrap();
    let out = run(&["avoidance", "--builtin", "bilinear", "--method", "gda_tt", "--n", "500"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("avoidance.json"))["fraction"].as_f64().unwrap(), 0.0);
}

#[test]
fn avoidance_refuses_a_stable_target() {
    let dir = TempDir::new().unwrap();
    let out = run(&["avoidance", "--builtin", "nondegenerate_quadratic", "--method", "eg_tt", "--n", "10"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("avoidance.json").exists());
}

#[test]
fn sweep_bilinear_curves_scale_with_sqrt_eps() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--builtin", "bilinear"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("eigencurves.csv"));
    assert_eq!(header.join(","), "eps,j,re,im,label,abs_over_sqrt_eps,re_over_eps");
    assert!(!rows.is_empty());
    let (eps, re, im) = (column(&header, "eps"), column(&header, "re"), column(&header, "im"));
    for row in &rows {
        let e: f64 = row[eps].parse().unwrap();
        let (x, y): (f64, f64) = (row[re].parse().unwrap(), row[im].parse().unwrap());
        assert!((x.hypot(y) - e.sqrt()).abs() <= 1e-12);
    }
    let (header, rows) = csv_rows(&dir.path().join("verdicts.csv"));
    let (method, stable) = (column(&header, "method"), column(&header, "stable"));
    for row in rows {
        let expected = if row[method] == "gda_tt" { "Unstable" } else { "Stable" };
        assert_eq!(row[stable], expected);
    }
}

#[test]
fn sweep_scalar_degenerate_linear_curves() {
    let dir = TempDir::new().unwrap();
    let out = run(&["sweep", "--builtin", "scalar_degenerate", "--a", "2", "--c", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&dir.path().join("eigencurves.csv"));
    let (eps, col) = (column(&header, "eps"), column(&header, "re_over_eps"));
    for row in rows.iter().filter(|r| r[eps].parse::<f64>().unwrap() < 1e-4) {
        let ratio: f64 = row[col].parse().unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    }
}

#[test]
fn sweep_empty_grids_write_headers_only() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["sweep", "--builtin", "bilinear", "--eps-grid", "1e-1:1e-6:0", "--tau-grid", "1:10:0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    for name in ["eigencurves.csv", "verdicts.csv"] {
        let (_, rows) = csv_rows(&dir.path().join(name));
        assert!(rows.is_empty());
    }
}
