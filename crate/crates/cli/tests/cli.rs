use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scene(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes").join(name)
}

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("verify runs")
}

fn run(config: &Path, suites: &[&str], out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--suite"];
    args.extend_from_slice(suites);
    args.extend_from_slice(extra);
    verify(&args)
}

fn report(out: &Path, suite: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{suite}.json"))).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scene.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn so3_axioms_pass_tightly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scene("so3.toml"), &["groupoid-axioms"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path(), "groupoid-axioms");
    assert_eq!(r["suite"], "groupoid-axioms");
    assert_eq!(r["meta"]["groupoid"], "Group(SO3)");
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.len() > 5);
    for c in checks {
        assert_eq!(c["pass"], true);
        if c["name"] != "smoothness" {
            assert!(c["residual"].as_f64().unwrap() < 1e-10, "{c}");
        }
    }
}

#[test]
fn lalg_reports_bracket_cancellation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scene("pair-circle.toml"), &["lalg"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "lalg");
    let c = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "cancellation").unwrap();
    assert!(c["residual"].as_f64().unwrap() < 5e-4);
    assert_eq!(c["tol"].as_f64(), Some(5e-4));
    let slope = r["meta"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.25);
    let table = std::fs::read_to_string(dir.path().join("bracket-table.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("x0,X0,X1,Y0,Y1,B0,B1"));
    assert_eq!(lines.count(), 64);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scene("so3.toml"), &["no-such-suite"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage:"), "{err}");
    assert!(!dir.path().join("timing.json").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        "[groupoid]\nkind = \"pair\"\n[tolerances]\nlalg = -1.0",
        "[groupoid]\nkind = \"pair\"\n[tolerances]\nnot-a-suite = 1.0",
        "[groupoid]\nkind = \"group\"\ngroup = \"SU2\"",
        "[groupoid]\nkind = \"pair\"\n[sections]\nx = [\"sin(y)\"]",
        "[groupoid]\nkind = \"pair\"\n[run]\ngrid = 0",
        "[groupoid\nkind = \"pair\"",
    ];
    for text in bad {
        let cfg = write_config(dir.path(), text);
        let out = run(&cfg, &["lalg"], &dir.path().join("out"), &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
    }
    let out = run(&scene("pair-circle.toml"), &["gauge-extension"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&dir.path().join("missing.toml"), &["lalg"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[groupoid]\nkind = \"pair\"\n[tolerances]\n\"lalg.cancellation\" = 1e-12\n");
    let out = run(&cfg, &["lalg"], &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&dir.path().join("out"), "lalg");
    assert_eq!(r["meta"]["pass"], false);
    let c = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "cancellation").unwrap();
    assert_eq!(c["pass"], false);
    assert_eq!(c["tol"].as_f64(), Some(1e-12));
}

#[test]
fn runtime_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // x + 2 sin x folds the circle, so it is not a diffeomorphism.
    let cfg = write_config(
        dir.path(),
        "[groupoid]\nkind = \"gauge\"\ngroup = \"SO3\"\ntransitions = [{ to = 1, from = 0, algebra = [\"0\", \"0\", \"x\"] }]\n[diffeo]\nmap = \"x + 2*sin(x)\"\n",
    );
    let out = run(&cfg, &["gauge-extension", "groupoid-axioms"], &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(3));
    // The other suite still reports.
    assert_eq!(report(&dir.path().join("out"), "groupoid-axioms")["meta"]["pass"], true);
}

#[test]
fn reports_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let suites = ["bisection", "flow", "lalg"];
    for d in [&a, &b] {
        let out = run(&scene("pair-circle.toml"), &suites, d.path(), &["--seed", "3", "--steps", "40", "--grid", "32"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for f in ["bisection.json", "flow.json", "lalg.json", "bisection-grid.csv", "trajectory.csv", "bracket-table.csv"] {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert_eq!(x, y, "{f} differs between runs");
    }
    let r = report(a.path(), "flow");
    assert_eq!(r["meta"]["seed"], 3);
    assert_eq!(r["meta"]["steps"], 40);
    assert_eq!(r["meta"]["grid"], 32);
    let timing: Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("timing.json")).unwrap()).unwrap();
    for s in suites {
        assert!(timing[s].as_f64().unwrap() >= 0.0);
    }
    let traj = std::fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,beta0,alpha0,g0,g1"));
    assert_eq!(traj.lines().count(), 42);
}

#[test]
fn every_suite_passes_on_the_reference_gauge_scene() {
    let dir = tempfile::tempdir().unwrap();
    let suites = ["groupoid-axioms", "local-addition", "bisection", "lalg", "flow", "regularity", "gauge-extension", "naturality"];
    let out = run(&scene("gauge-reference.toml"), &suites, dir.path(), &["--steps", "40", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for s in suites {
        assert_eq!(report(dir.path(), s)["meta"]["pass"], true, "{s}");
    }
}

#[test]
fn trivial_gauge_scene_includes_the_atiyah_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&scene("gauge-trivial.toml"), &["naturality"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "naturality");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "atiyah" && c["pass"] == true));
}
