use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polygate_core::evolve::dominates;
use polygate_core::sentinel;
use serde_json::Value;
use tempfile::TempDir;

fn polygate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polygate"))
        .args(args)
        .env_remove("POLYGATE_OUT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = polygate(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn csv_rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn relax_reaches_target_packing_fraction() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("relax");
    ok(&["relax", "-o", s(&out)]);
    let report = json(out.join("relax_report.json"));
    assert_eq!(report["particles"], 30);
    assert!((report["packing_fraction"].as_f64().unwrap() - 0.91).abs() < 1e-6);
    assert!(report["residual_force"].as_f64().unwrap() < 1e-10);
    for name in ["packing.json", "manifest.json", "config.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn occupied_output_is_refused_without_overwrite() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("relax");
    ok(&["relax", "-o", s(&out)]);
    assert_eq!(polygate(&["relax", "-o", s(&out)]).status.code(), Some(1));
    ok(&["relax", "-o", s(&out), "--overwrite"]);
}

#[test]
fn tight_force_tolerance_is_met_or_reported() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("relax");
    let run = polygate(&["relax", "-o", s(&out), "--force-tol", "1e-12"]);
    if run.status.success() {
        let report = json(out.join("relax_report.json"));
        assert!(report["residual_force"].as_f64().unwrap() <= 1e-12);
    } else {
        assert_eq!(run.status.code(), Some(3));
    }
}

#[test]
fn malformed_bits_are_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("eval");
    assert_eq!(polygate(&["evaluate", "-o", s(&out), "--bits", "2"]).status.code(), Some(1));
    assert_eq!(polygate(&["evaluate", "-o", s(&out), "--bits", "012"]).status.code(), Some(1));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "bad.json", r#"{"frequency": 10.0, "frequncy": 12.0}"#);
    let out = tmp.path().join("eval");
    assert_eq!(polygate(&["evaluate", "-c", s(&cfg), "-o", s(&out)]).status.code(), Some(1));
}

#[test]
fn evaluate_emits_full_trajectories() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("eval");
    ok(&["evaluate", "-o", s(&out), "--emit-trajectories"]);
    let result = json(out.join("gate_result.json"));
    assert_eq!(result["gains"].as_array().unwrap().len(), 4);
    let steps = 10_000;
    for case in ["00", "01", "10", "11"] {
        let (header, rows) = csv_rows(out.join(format!("trajectory_{case}.csv")));
        assert_eq!(rows.len(), steps + 1, "case {case}");
        assert_eq!(header.len(), 1 + 2 * 30);
    }
}

#[test]
fn sweep_table_round_trips() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "sweep.json", r#"{"low": 5.0, "high": 15.0, "step": 5.0}"#);
    let out = tmp.path().join("sweep");
    ok(&["sweep", "-c", s(&cfg), "-o", s(&out)]);
    let (header, rows) = csv_rows(out.join("sweep.csv"));
    assert_eq!(header, ["f", "G00", "G01", "G10", "G11", "M"]);
    assert_eq!(rows.len(), 3);
    let sweep = json(out.join("sweep.json"));
    for (row, point) in rows.iter().zip(sweep["points"].as_array().unwrap()) {
        assert_eq!(sentinel::parse(&row[0]), point["frequency"].as_f64());
        let m = sentinel::parse(&row[5]).unwrap();
        match &point["result"]["nandness"] {
            Value::Number(n) => assert_eq!(Some(m), n.as_f64()),
            Value::String(tag) => assert_eq!(sentinel::display(m), *tag),
            other => panic!("unexpected nandness {other}"),
        }
    }
}

#[test]
fn heatmap_draws_every_particle() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("heatmap");
    ok(&["heatmap", "-o", s(&out)]);
    let svg = fs::read_to_string(out.join("heatmap.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 30);
    let (_, rows) = csv_rows(out.join("heatmap.csv"));
    assert_eq!(rows.len(), 30);
}

#[test]
fn noise_reports_one_row_per_snr() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "noise.json", r#"{"snr_db": [20.0, 0.0, -20.0], "trials": 2}"#);
    let out = tmp.path().join("noise");
    ok(&["noise", "-c", s(&cfg), "-o", s(&out)]);
    let (_, rows) = csv_rows(out.join("noise.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "2"));
}

const SMALL_RUN: &str = r#"{"population_size": 4, "generations": 4, "checkpoint_every": 2}"#;

#[test]
fn evolution_is_reproducible_and_resumable() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "evolve.json", SMALL_RUN);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    ok(&["evolve", "-c", s(&cfg), "-o", s(&a), "--seed", "3"]);
    ok(&["evolve", "-c", s(&cfg), "-o", s(&b), "--seed", "3"]);
    let history = |dir: &Path| fs::read_to_string(dir.join("history.jsonl")).unwrap();
    assert_eq!(history(&a), history(&b));
    assert_eq!(history(&a).lines().count(), 5);
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap(),
        fs::read(b.join("manifest.json")).unwrap()
    );

    ok(&["evolve", "-c", s(&cfg), "-o", s(&c), "--seed", "3", "--stop-after", "1"]);
    assert_eq!(history(&c).lines().count(), 2);
    let ck = c.join("checkpoint.json");
    ok(&["evolve", "-o", s(&c), "--resume", s(&ck)]);
    assert_eq!(history(&a), history(&c));
    assert_eq!(
        fs::read(a.join("best_design.json")).unwrap(),
        fs::read(c.join("best_design.json")).unwrap()
    );
}

#[test]
fn poly_front_is_mutually_non_dominated() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "poly.json", SMALL_RUN);
    let out = tmp.path().join("poly");
    ok(&["evolve-poly", "-c", s(&cfg), "-o", s(&out)]);
    let (header, rows) = csv_rows(out.join("pareto_front.csv"));
    assert_eq!(header, ["id", "F_f1", "F_f2"]);
    let points: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r[1..].iter().map(|x| sentinel::parse(x).unwrap()).collect())
        .collect();
    assert!(!points.is_empty());
    for a in &points {
        for b in &points {
            assert!(!dominates(a, b).unwrap());
        }
    }
    assert!(out.join("knee_design.json").exists());
}

#[test]
fn poly_needs_two_frequencies() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "poly.json", r#"{"frequencies": [10.0]}"#);
    let out = tmp.path().join("poly");
    assert_eq!(polygate(&["evolve-poly", "-c", s(&cfg), "-o", s(&out)]).status.code(), Some(1));
}
