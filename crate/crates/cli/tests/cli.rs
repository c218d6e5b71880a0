use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn homoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homoflow"))
        .args(args)
        .env_remove("HOMOFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn landau_profile_has_requested_rows() {
    let o = homoflow(&["landau", "profile", "--kappa", "1", "--points", "200"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,v,f,p,phi"));
    assert_eq!(lines.count(), 200);
}

#[test]
fn mode_two_is_refused_as_trivial() {
    let o = homoflow(&["hamel", "solve", "--k", "2"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    let line: Value = serde_json::from_str(err.trim()).expect("structured diagnostic");
    assert_eq!(line["exit_code"], 3);
    assert!(line["message"].as_str().unwrap().contains("trivial"));

    let o = homoflow(&["hamel", "solve", "--k", "1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8(o.stderr).unwrap().contains("no solution"));
}

#[test]
fn verify_landau_passes_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("out.json");
    let o = homoflow(&["verify", "--field", "landau", "--kappa", "1", "--report", path_str(&report)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["field"], "landau");
    assert_eq!(v["h"].as_array().unwrap().len(), 3);
    assert_eq!(v["norms"].as_array().unwrap().len(), 3);
    assert!((v["order"].as_f64().unwrap() - 2.0).abs() < 0.3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&homoflow(&["landau", "profile", "--kappa", "1", "--bogus"])), 2);
    assert_eq!(code(&homoflow(&["frobnicate"])), 2);
    assert_eq!(code(&homoflow(&["landau", "eval", "--kappa", "-1", "--theta", "1"])), 2);
    assert_eq!(code(&homoflow(&["suite", "--tolerance", "-1"])), 2);
    assert_eq!(code(&homoflow(&["verify", "--field", "profile-file"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_homoflow"))
        .args(["solve", "--n", "4", "--grid", "16", "--out", "/dev/null"])
        .env("HOMOFLOW_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_is_deterministic_and_reverifiable() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = homoflow(&["solve", "--n", "4", "--grid", "32", "--seed", "11", "--out", path_str(p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["provenance"]["timestamp"] = Value::Null;
        v
    };
    let va = strip(&a);
    assert_eq!(va, strip(&b));
    assert_eq!(va["provenance"]["seed"], 11);
    for key in ["n", "thetas", "g", "f", "p", "residuals"] {
        assert!(va.get(key).is_some(), "{key}");
    }
    let o = homoflow(&["verify", "--field", "profile-file", "--input", path_str(&a)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["pass"], true);
}

#[test]
fn seed_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let o = Command::new(env!("CARGO_BIN_EXE_homoflow"))
        .args(["solve", "--n", "5", "--grid", "24", "--out", path_str(&a)])
        .env("HOMOFLOW_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(v["provenance"]["seed"], 42);
}

#[test]
fn written_tables_reverify() {
    let dir = TempDir::new().unwrap();
    let landau = dir.path().join("landau.csv");
    let landau_json = dir.path().join("landau.json");
    let hamel = dir.path().join("hamel.csv");
    let hamel_json = dir.path().join("hamel.json");
    let ell = dir.path().join("elliptic.csv");
    let amp = dir.path().join("amp.csv");
    let runs: [Vec<&str>; 4] = [
        vec!["landau", "profile", "--kappa", "0.5", "--points", "96", "--out", path_str(&landau), "--solution", path_str(&landau_json)],
        vec!["hamel", "solve", "--k", "4", "--points", "256", "--csv", path_str(&hamel), "--solution", path_str(&hamel_json)],
        vec!["elliptic", "table", "--kappa-min", "0.01", "--kappa-max", "100", "--points", "20", "--log", "--out", path_str(&ell)],
        vec!["hamel", "sweep", "--kmax", "6", "--out", path_str(&amp)],
    ];
    for args in &runs {
        let o = homoflow(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for p in [&landau, &landau_json, &hamel, &hamel_json, &ell] {
        let o = homoflow(&["verify", "--field", "profile-file", "--input", path_str(p)]);
        assert_eq!(code(&o), 0, "{}: {}", p.display(), String::from_utf8_lossy(&o.stdout));
    }
    let hamel_summary = homoflow(&["hamel", "solve", "--k", "4"]);
    let v = stdout_json(&hamel_summary);
    for key in ["k", "kappa", "delta", "roots", "b", "E", "c_pressure", "amplitude"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let text = std::fs::read_to_string(&amp).unwrap();
    assert!(text.starts_with("k,kappa,delta,amplitude,scaled,limit,relative_gap"));
}

#[test]
fn tampered_file_fails_verification() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("h.csv");
    assert_eq!(code(&homoflow(&["hamel", "solve", "--k", "3", "--points", "128", "--csv", path_str(&path)])), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[10].split(',').collect();
    let f: f64 = fields[1].parse().unwrap();
    lines[10] = format!("{},{},{}", fields[0], f + 0.01, fields[2]);
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = homoflow(&["verify", "--field", "profile-file", "--input", path_str(&path)]);
    assert_eq!(code(&o), 4);
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn suite_reports_failures_with_exit_four() {
    let o = homoflow(&["suite", "--only", "1,4", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], 2);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 2);

    let o = homoflow(&["suite", "--only", "1,2,3", "--tolerance", "1e-15"]);
    assert_eq!(code(&o), 4);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion")).count(), 3);
    assert!(text.contains("FAIL"));
}

#[test]
fn green_and_force_emit_json() {
    let g = stdout_json(&homoflow(&["hamel", "green", "--i", "1", "--j", "1", "--x", "0.6", "--y", "0.8"]));
    // G_{·11} = e_r cos 2θ / (4π r) with θ measured from the x2 axis
    let theta = 0.6f64.atan2(0.8);
    let expect = (2.0 * theta).cos() / (4.0 * std::f64::consts::PI);
    assert!((g["G"][0].as_f64().unwrap() - expect * 0.6).abs() < 1e-14);
    assert!((g["G"][1].as_f64().unwrap() - expect * 0.8).abs() < 1e-14);
    assert_eq!(code(&homoflow(&["hamel", "green", "--i", "3", "--j", "1", "--x", "1", "--y", "0"])), 2);

    let f = stdout_json(&homoflow(&["landau", "force", "--kappa", "1"]));
    let b = f["b"].as_array().unwrap();
    assert_eq!(b.len(), 3);
    assert!(b[2].as_f64().unwrap() > 0.0);
    assert!((f["c"].as_f64().unwrap() - (f["A"].as_f64().unwrap() - 1.0)).abs() < 1e-15);
}
