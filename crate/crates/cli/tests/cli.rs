use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn innerfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_innerfn")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = innerfn(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn single_atom_model(dir: &TempDir) -> PathBuf {
    let seq = write(dir, "atom.csv", "0\n");
    let w = write(dir, "w.csv", &format!("{}\n", std::f64::consts::PI));
    let model = dir.path().join("single_atom.json");
    ok(&["build", "--sequence", s(&seq), "--strategy", "custom", "--weights", s(&w), "-o", s(&model)]);
    model
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn help_and_usage_exit_codes() {
    assert_eq!(innerfn(&["--help"]).status.code(), Some(0));
    assert_eq!(innerfn(&["bogus"]).status.code(), Some(1));
    assert_eq!(innerfn(&["generate", "--family", "power"]).status.code(), Some(1));
    assert_eq!(innerfn(&["generate", "--family", "power", "--window", "-3:3"]).status.code(), Some(1));
    assert_eq!(innerfn(&["sup", "--model", "/nonexistent/model.json", "--window", "0:1"]).status.code(), Some(3));
}

#[test]
fn generate_power_window() {
    let out = ok(&["generate", "--family", "power", "--k", "2", "--window", "-3:3"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let pts: Vec<f64> = v["points"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
    assert_eq!(pts, vec![-9.0, -4.0, -1.0, 1.0, 4.0, 9.0]);
}

#[test]
fn eval_single_atom_grid() {
    let dir = TempDir::new().unwrap();
    let model = single_atom_model(&dir);
    let out = ok(&["eval", "--model", s(&model), "--grid", "-10:10:0.01"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2001);
    for r in &rows {
        let x: f64 = r[0].parse().unwrap();
        let d: f64 = r[3].parse().unwrap();
        assert!((d - 2.0 / (1.0 + x * x)).abs() < 1e-9, "{x}");
        let (re, im): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-12);
    }
    let at_zero = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 0.0).unwrap();
    assert_eq!(at_zero[4], "atom_limit");
    assert_eq!(rows[0][0], "-1.0000000000000000e1");
}

#[test]
fn pipeline_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let seq = dir.path().join(format!("seq{tag}.json"));
        let model = dir.path().join(format!("model{tag}.json"));
        ok(&["generate", "--family", "arithmetic", "--window", "1:40", "-o", s(&seq)]);
        ok(&["build", "--sequence", s(&seq), "--strategy", "unit", "-o", s(&model)]);
        let o = innerfn(&["eval", "--model", s(&model), "--grid", "0:41:0.25"]);
        (o.stdout, o.status.code())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn counterexample_sweep_csv() {
    let out = ok(&["counterexample", "--N", "8,16,32", "--D", "1", "--strategy", "unit"]);
    assert!(out.starts_with("N,D,min_height,Z,sup_phase_derivative"));
    let rows = csv_rows(&out);
    let h: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(h.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(innerfn(&["counterexample", "--N", "8", "--strategy", "custom"]).status.code(), Some(1));
}

#[test]
fn zeros_and_artifacts_reload() {
    let dir = TempDir::new().unwrap();
    let seq = write(&dir, "pair.csv", "-1\n1\n");
    let w = write(&dir, "w.csv", "1\n1\n");
    let model = dir.path().join("pair.json");
    ok(&["build", "--sequence", s(&seq), "--strategy", "custom", "--weights", s(&w), "-o", s(&model)]);
    let zs: serde_json::Value = serde_json::from_str(&ok(&["zeros", "--model", s(&model)])).unwrap();
    assert_eq!(zs["certified"], true);
    let z0 = &zs["zeros"][0];
    let re = (std::f64::consts::PI.powi(2) - 1.0).sqrt() / std::f64::consts::PI;
    assert!((z0[0].as_f64().unwrap() + re).abs() < 1e-10);
    let region: serde_json::Value =
        serde_json::from_str(&ok(&["zeros", "--model", s(&model), "--region", "0:2:0.01:1"])).unwrap();
    assert_eq!(region["zeros"].as_array().unwrap().len(), 1);
    assert_eq!(innerfn(&["zeros", "--model", s(&model), "--region", "0:2:0:1"]).status.code(), Some(1));
    let sup: serde_json::Value =
        serde_json::from_str(&ok(&["sup", "--model", s(&model), "--window", "-5:5", "--no-profile"])).unwrap();
    assert!(sup["sup"].as_f64().unwrap() > 2.0 * std::f64::consts::PI);
    let disc: serde_json::Value = serde_json::from_str(&ok(&["discrepancy", "--measure", s(&model)])).unwrap();
    assert!(disc["sup_abs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn classify_krein_and_regularity() {
    let dir = TempDir::new().unwrap();
    let seq = dir.path().join("lg.json");
    ok(&["generate", "--family", "log-gap", "--a1", "10", "--window", "1:60", "-o", s(&seq)]);
    let v: serde_json::Value = serde_json::from_str(&ok(&["classify", "--sequence", s(&seq)])).unwrap();
    assert!(v["regime"].is_string());
    let model: serde_json::Value = serde_json::from_str(&ok(&["build", "--sequence", s(&seq), "--krein"])).unwrap();
    assert_eq!(model["kind"], "krein");
    assert!(model.get("measure").is_none() && model["krein_data"]["derived_alpha"].as_array().unwrap().len() == 60);
    let r: serde_json::Value =
        serde_json::from_str(&ok(&["regularity", "--punctured", "--window", "0:134217728"])).unwrap();
    assert!(r["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn tolerance_controls() {
    let dir = TempDir::new().unwrap();
    let seq = dir.path().join("p.json");
    let model = dir.path().join("m.json");
    ok(&["generate", "--family", "power", "--k", "2", "--window", "-5:5", "-o", s(&seq)]);
    ok(&["build", "--sequence", s(&seq), "--strategy", "gap", "-o", s(&model)]);
    // a ten-point window of an infinite family cannot meet 1e-9
    assert_eq!(innerfn(&["eval", "--model", s(&model), "--grid", "0.5:1.5:0.5"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_innerfn"))
        .args(["eval", "--model", s(&model), "--grid", "0:1:0.5"])
        .env("MIF_REL_TOLERANCE", "nope")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
